#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lehmer/calculus.hpp"
#include "lehmer/errors.hpp"
#include "lehmer/inflection.hpp"
#include "lehmer/mean_core.hpp"
#include "lehmer/search.hpp"

namespace lehmer_mean {

struct CheckResult {
  std::string name;
  bool passed;
  std::int64_t samples;
  /// Counterexample inputs when the check failed.
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  /// Random samples per property.
  std::int64_t samples = 500;
};

inline constexpr std::string_view kVerifyScopes[] = {"monotonicity", "means",  "calculus", "n2",
                                                     "n3",           "parity", "bound",    "figures"};

namespace detail {

inline std::string describe(const MeanSpec& spec, std::optional<double> p = std::nullopt) {
  std::ostringstream out;
  out.precision(17);
  out << "x={";
  for (std::size_t i = 0; i < spec.size(); ++i) out << (i ? "," : "") << spec.values()[i];
  out << "}";
  if (!spec.unit_weights()) {
    out << " w={";
    for (std::size_t i = 0; i < spec.size(); ++i) out << (i ? "," : "") << spec.weights()[i];
    out << "}";
  }
  if (p) out << " p=" << *p;
  return out.str();
}

inline std::vector<double> log_uniform_values(TrialStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  return v;
}

inline MeanSpec random_spec(TrialStream& rng, std::size_t n, double lo, double hi, bool weighted) {
  const auto x = log_uniform_values(rng, n, lo, hi);
  if (!weighted) return make_spec(x);
  const auto w = log_uniform_values(rng, n, 0.1, 10.0);
  return make_spec(x, w);
}

inline bool pairwise_distinct(const MeanSpec& spec) {
  auto v = std::vector<double>(spec.values().begin(), spec.values().end());
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

class check_runner {
 public:
  check_runner(std::uint64_t seed, std::vector<CheckResult>& out) : seed_(seed), out_(out) {}

  /// Runs `body(rng, i)` for i in [0, samples); the first counterexample stops the check.
  void run(std::string name, std::int64_t samples,
           const std::function<std::optional<std::string>(TrialStream&, std::int64_t)>& body) {
    std::uint64_t stream = seed_ ^ 0xCBF29CE484222325ull;
    for (unsigned char c : name) stream = (stream ^ c) * 0x100000001B3ull;
    for (std::int64_t i = 0; i < samples; ++i) {
      TrialStream rng(stream, static_cast<std::uint64_t>(i));
      std::optional<std::string> failure;
      try {
        failure = body(rng, i);
      } catch (const std::exception& e) {
        failure = std::string("exception: ") + e.what();
      }
      if (failure) {
        out_.push_back({std::move(name), false, i + 1, *failure});
        return;
      }
    }
    out_.push_back({std::move(name), true, samples, {}});
  }

 private:
  std::uint64_t seed_;
  std::vector<CheckResult>& out_;
};

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

/// Executes the randomized property checks of one scope ("all" for every
/// scope). Deterministic for a fixed seed.
inline std::vector<CheckResult> run_verification(std::string_view scope, const VerifyOptions& options = {}) {
  const bool all = scope == "all";
  if (!all && std::find(std::begin(kVerifyScopes), std::end(kVerifyScopes), scope) == std::end(kVerifyScopes))
    throw usage_error("unknown verify scope: " + std::string(scope));

  std::vector<CheckResult> results;
  detail::check_runner check(options.seed, results);
  const std::int64_t m = options.samples;
  auto want = [&](std::string_view s) { return all || scope == s; };
  using detail::describe;

  if (want("monotonicity")) {
    check.run("monotonicity", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 0.1, 10.0, rng.uniform() < 0.5);
      double p = rng.uniform(-50.0, 50.0), s = rng.uniform(-50.0, 50.0);
      if (p > s) std::swap(p, s);
      const double lp = lehmer(spec, p).value, ls = lehmer(spec, s).value;
      if (lp > ls * (1.0 + 4e-16)) return describe(spec, p) + " s=" + std::to_string(s);
      // Strictness through the derivative, away from the saturated tails.
      const double q = rng.uniform(-20.0, 20.0);
      if (!spec.is_constant() && !(first_derivative(spec, q) > 0.0)) return describe(spec, q) + " L'<=0";
      if (spec.is_constant() && first_derivative(spec, q) != 0.0) return describe(spec, q) + " L'!=0";
      return std::nullopt;
    });
    check.run("bounded-by-min-max", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 1e-5, 1e5, true);
      const double p = rng.uniform(-1e4, 1e4);
      const double v = lehmer(spec, p).value;
      if (!(spec.min_value() <= v && v <= spec.max_value()) || !std::isfinite(v)) return describe(spec, p);
      return std::nullopt;
    });
  }

  if (want("means")) {
    check.run("homogeneity", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 0.1, 10.0, rng.uniform() < 0.5);
      const double c = std::exp(rng.uniform(-5.0, 5.0));
      const double p = rng.uniform(-20.0, 20.0);
      if (!detail::close_rel(lehmer(scale(spec, c), p).value, c * lehmer(spec, p).value, 1e-12))
        return describe(spec, p) + " c=" + std::to_string(c);
      return std::nullopt;
    });
    check.run("classical-means", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 0.1, 10.0, true);
      double sw = 0, swx = 0, swinv = 0;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        sw += spec.weights()[i];
        swx += spec.weights()[i] * spec.values()[i];
        swinv += spec.weights()[i] / spec.values()[i];
      }
      if (!detail::close_rel(lehmer(spec, 1.0).value, swx / sw, 1e-12)) return describe(spec, 1.0);
      if (!detail::close_rel(lehmer(spec, 0.0).value, sw / swinv, 1e-12)) return describe(spec, 0.0);
      return std::nullopt;
    });
    check.run("asymptotes", m / 5, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      auto spec = detail::random_spec(rng, 2 + rng.next() % 4, 0.5, 2.0, false);
      if (spec.is_constant()) return std::nullopt;
      const auto report = find_inflections(spec);
      const auto [lo, hi] = asymptotes(spec);
      if (std::abs(lehmer(spec, report.scan_lo).value - lo) > 1e-6 ||
          std::abs(lehmer(spec, report.scan_hi).value - hi) > 1e-6)
        return describe(spec);
      return std::nullopt;
    });
  }

  if (want("calculus")) {
    check.run("log-moment-order", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 0.1, 10.0, rng.uniform() < 0.5);
      const double p = rng.uniform(-20.0, 20.0);
      if (log_moment(spec, p, 1) - log_moment(spec, p - 1.0, 1) < -1e-12) return describe(spec, p);
      return std::nullopt;
    });
    check.run("second-derivative-vs-finite-difference", m,
              [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
                const auto spec = detail::random_spec(rng, 1 + rng.next() % 6, 0.1, 10.0, false);
                const double p = rng.uniform(-20.0, 20.0);
                const double v = second_derivative(spec, p);
                const double fd = fd_second_derivative(spec, p, 1e-4);
                if (std::abs(v - fd) > std::max(1e-5 * std::abs(v), 1e-8))
                  return describe(spec, p) + " analytic=" + std::to_string(v) + " fd=" + std::to_string(fd);
                return std::nullopt;
              });
    check.run("extreme-signs", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 2 + rng.next() % 5, 0.5, 2.0, false);
      if (spec.is_constant()) return std::nullopt;
      const auto report = find_inflections(spec);
      if (!(second_derivative(spec, report.scan_lo) >= 0.0) || !(second_derivative(spec, report.scan_hi) <= 0.0))
        return describe(spec);
      return std::nullopt;
    });
  }

  if (want("n2")) {
    check.run("n2-closed-form", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 2, 0.1, 10.0, false);
      const double p = rng.uniform(-20.0, 20.0);
      const double general = second_derivative(spec, p), closed = second_derivative_n2(spec, p);
      if (!detail::close_rel(general, closed, 1e-10) && std::abs(general - closed) > 1e-14)
        return describe(spec, p);
      return std::nullopt;
    });
    check.run("n2-unique-inflection-at-one", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 2, 0.1, 10.0, false);
      if (spec.is_constant()) return std::nullopt;
      const auto report = find_inflections(spec);
      if (report.count() != 1 || std::abs(report.roots[0].p_star - 1.0) > 1e-8) return describe(spec);
      return std::nullopt;
    });
    check.run("n2-weighted-closed-form", m / 2, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 2, 0.1, 10.0, true);
      if (spec.is_constant()) return std::nullopt;
      const double closed = weighted_n2_inflection(spec);
      const auto report = find_inflections(spec);
      const double mid = 0.5 * (spec.values()[0] + spec.values()[1]);
      if (report.count() != 1 || std::abs(report.roots[0].p_star - closed) > 1e-8 ||
          !detail::close_rel(lehmer(spec, closed).value, mid, 1e-10))
        return describe(spec);
      return std::nullopt;
    });
  }

  if (want("n3")) {
    check.run("n3-inequalities", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 3, 0.1, 10.0, false);
      const double p = rng.uniform(-20.0, 20.0);
      const auto s = n3_inequalities(spec, p);
      if (s.a < -1e-12 || s.b < -1e-12 || s.c < -1e-12) return describe(spec, p);
      if (tilde_l_prime(spec, p) > 1e-12) return describe(spec, p) + " L~'>0";
      return std::nullopt;
    });
    check.run("n3-closed-form", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 3, 0.1, 10.0, false);
      const double p = rng.uniform(-20.0, 20.0);
      const double general = second_derivative(spec, p), closed = second_derivative_n3(spec, p);
      if (!detail::close_rel(general, closed, 1e-10) && std::abs(general - closed) > 1e-14)
        return describe(spec, p);
      return std::nullopt;
    });
    check.run("n3-k-symmetry", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 3, 0.1, 10.0, false);
      const auto x = spec.values();
      const double k = k_constant(spec).k;
      const double kp = k_constant(make_spec({x[2], x[0], x[1]})).k;
      const double ks = k_constant(make_spec({x[1], x[0], x[2]})).k;
      if (!detail::close_rel(k, kp, 1e-12) || !detail::close_rel(k, ks, 1e-12)) return describe(spec);
      return std::nullopt;
    });
    check.run("n3-unique-inflection-and-k-side", m, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 3, 0.1, 10.0, false);
      if (!detail::pairwise_distinct(spec)) return std::nullopt;
      const auto report = find_inflections(spec);
      if (report.count() != 1) return describe(spec) + " roots=" + std::to_string(report.count());
      const auto side = classify_n3_side(spec);
      const double p = report.roots[0].p_star;
      if ((side == N3Side::below_one && !(p < 1.0)) || (side == N3Side::above_one && !(p > 1.0)) ||
          side == N3Side::degenerate)
        return describe(spec) + " side mismatch";
      return std::nullopt;
    });
  }

  if (want("parity")) {
    check.run("parity-odd-root-count", m / 2, [](TrialStream& rng, std::int64_t) -> std::optional<std::string> {
      const auto spec = detail::random_spec(rng, 2 + rng.next() % 4, 0.5, 2.0, false);
      if (spec.is_constant()) return std::nullopt;
      InflectionReport report;
      try {
        report = find_inflections(spec);
      } catch (const range_exhausted_error&) {
        return std::nullopt;
      }
      if (!report.parity_ok || report.count() % 2 == 0) return describe(spec);
      if (static_cast<std::int64_t>(report.count()) > report.bound_j) return describe(spec) + " above bound";
      for (std::size_t i = 0; i < report.count(); ++i)
        if (report.roots[i].direction !=
            (i % 2 == 0 ? Direction::convex_to_concave : Direction::concave_to_convex))
          return describe(spec) + " directions do not alternate";
      return std::nullopt;
    });
  }

  if (want("bound")) {
    check.run("bound-values", 1, [](TrialStream&, std::int64_t) -> std::optional<std::string> {
      if (count_bound(2).j != 1 || count_bound(3).j != 5 || count_bound(4).j != 15)
        return std::string("J(2..4) != (1, 5, 15)");
      for (std::int64_t n = 2; n <= 200; ++n) {
        const auto b = count_bound(n);
        if (b.j % 2 == 0 || b.j > b.n_terms - 1 || b.n_terms != n * (n + 4) * (n - 1) / 6)
          return "n=" + std::to_string(n);
      }
      return std::nullopt;
    });
  }

  if (want("figures")) {
    check.run("figure-1", 1, [](TrialStream&, std::int64_t) -> std::optional<std::string> {
      const auto spec = make_spec({0.5, 2.5});
      const auto report = find_inflections(spec);
      if (std::abs(lehmer(spec, 1.0).value - 1.5) > 1e-12) return std::string("L(1) != 1.5");
      if (report.count() != 1 || std::abs(report.roots[0].p_star - 1.0) > 1e-8) return std::string("p* != 1");
      return std::nullopt;
    });
    check.run("figure-2", 1, [](TrialStream&, std::int64_t) -> std::optional<std::string> {
      const auto spec = make_spec({1.0, 2.0, 3.0});
      const auto report = find_inflections(spec);
      if (report.count() != 1 || std::abs(report.roots[0].p_star - 0.707) > 5e-3) return std::string("p* != 0.707");
      if (std::abs(k_constant(spec).k + 0.94) > 0.01) return std::string("K != -0.94");
      if (classify_n3_side(spec) != N3Side::below_one) return std::string("side != below_one");
      return std::nullopt;
    });
    check.run("figure-3", 1, [](TrialStream&, std::int64_t) -> std::optional<std::string> {
      const auto spec = make_spec({1.0259, 1.0241, 1.0244, 0.96});
      const auto report = find_inflections(spec);
      const double expected[] = {-15.8075, 203.9186, 401.3897};
      if (report.count() != 3) return "root count " + std::to_string(report.count());
      for (int i = 0; i < 3; ++i)
        if (std::abs(report.roots[static_cast<std::size_t>(i)].p_star - expected[i]) > 0.5)
          return "root " + std::to_string(i);
      return std::nullopt;
    });
  }
  return results;
}

}  // namespace lehmer_mean
