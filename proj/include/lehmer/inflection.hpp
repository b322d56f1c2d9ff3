#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lehmer/calculus.hpp"
#include "lehmer/errors.hpp"
#include "lehmer/mean_core.hpp"
#include "lehmer/numeric.hpp"

namespace lehmer_mean {

/// Scan and refinement policy for find_inflections().
struct ScanConfig {
  double initial_half_width = 64.0;
  double expansion_factor = 2.0;
  double max_half_width = 1e6;
  /// Base grid density; cells are split further where |L''| dips.
  double grid_points_per_unit = 8.0;
  double refine_tolerance = 1e-9;
  precision_mode precision = precision_mode::automatic;
  /// Distance |L - asymptote| the range ends must reach; tightened to a
  /// relative bound when the asymptote is below one.
  double asymptote_tolerance = 1e-6;
  int densify_depth = 12;
  double densify_ratio = 1e-3;

  void validate() const {
    if (!(initial_half_width > 0.0)) throw usage_error("initial half width must be positive");
    if (!(expansion_factor > 1.0)) throw usage_error("expansion factor must exceed 1");
    if (!(max_half_width >= initial_half_width))
      throw usage_error("max half width must be at least the initial half width");
    if (!(grid_points_per_unit > 0.0)) throw usage_error("grid density must be positive");
    if (!(refine_tolerance > 0.0)) throw usage_error("refine tolerance must be positive");
    if (!(asymptote_tolerance > 0.0)) throw usage_error("asymptote tolerance must be positive");
    if (densify_depth < 0) throw usage_error("densify depth must be non-negative");
  }
};

enum class Direction { convex_to_concave, concave_to_convex };

inline std::string_view to_string(Direction d) {
  return d == Direction::convex_to_concave ? "convex-to-concave" : "concave-to-convex";
}

struct InflectionPoint {
  double p_star;
  double bracket_lo;
  double bracket_hi;
  /// |L''(p_star)|
  double residual;
  Direction direction;
  /// Two refined roots closer than 2 * refine_tolerance collapsed into this one.
  bool merged = false;
  precision_mode precision_used = precision_mode::standard;
};

struct InflectionReport {
  std::vector<InflectionPoint> roots;
  bool parity_ok = false;
  std::int64_t bound_j = 0;
  double scan_lo = 0.0;
  double scan_hi = 0.0;
  precision_mode precision_used = precision_mode::standard;
  std::vector<std::string> warnings;

  std::size_t count() const { return roots.size(); }
};

/// Thrown when the range reaches max_half_width before L'' shows its
/// asymptotic signs. Carries the roots found on the widest range scanned.
class range_exhausted_error : public error {
 public:
  range_exhausted_error(const std::string& what, InflectionReport partial)
      : error(what), partial_(std::move(partial)) {}
  const InflectionReport& partial() const { return partial_; }

 private:
  InflectionReport partial_;
};

/// Upper bound on the number of inflection points for n values.
struct CountBound {
  /// Maximum inflection count, parity-adjusted to be odd.
  std::int64_t j;
  /// Surviving exponential-polynomial terms, n(n+4)(n-1)/6.
  std::int64_t n_terms;
};

inline CountBound count_bound(std::int64_t n) {
  if (n < 2) throw usage_error("count bound requires n >= 2");
  const std::int64_t terms = n * (n + 4) * (n - 1) / 6;
  std::int64_t j = terms - 1;
  if (j % 2 == 0) --j;
  return {j, terms};
}

/// Closed-form inflection of a weighted pair:
///   p* = 1 - log(w_1 / w_2) / log(x_1 / x_2).
inline double weighted_n2_inflection(const MeanSpec& spec) {
  if (spec.size() != 2) throw usage_error("operation requires exactly two values");
  const double dl = spec.log_values()[0] - spec.log_values()[1];
  if (dl == 0.0) throw degenerate_error("inflection undefined for equal values");
  return 1.0 - (spec.log_weights()[0] - spec.log_weights()[1]) / dl;
}

enum class N3Side { below_one, above_one, degenerate };

inline std::string_view to_string(N3Side s) {
  switch (s) {
    case N3Side::below_one: return "below_one";
    case N3Side::above_one: return "above_one";
    case N3Side::degenerate: return "degenerate";
  }
  return "degenerate";
}

/// Side of p = 1 on which the unique three-value inflection lies, from sign(K).
inline N3Side classify_n3_side(const MeanSpec& spec) {
  const double k = k_constant(spec).k;
  if (spec.is_constant() || k == 0.0) return N3Side::degenerate;
  return k < 0.0 ? N3Side::below_one : N3Side::above_one;
}

namespace detail {

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct sample {
  double p;
  double f;
};

class inflection_scanner {
 public:
  inflection_scanner(const MeanSpec& spec, const ScanConfig& config)
      : spec_(spec), config_(config), curvature_(spec) {}

  double curvature(double p) {
    const auto s = curvature_(p, config_.precision);
    if (s.used == precision_mode::extended) used_extended_ = true;
    return s.value;
  }

  double curvature_extended(double p) {
    used_extended_ = true;
    return curvature_.extended(p).value;
  }

  bool used_extended() const { return used_extended_; }

  bool near_asymptote(double p, double asymptote) const {
    return std::abs(lehmer(spec_, p).value - asymptote) <= config_.asymptote_tolerance * std::min(1.0, asymptote);
  }

  /// Left end acceptable: convex there and L at its lower asymptote. An exact
  /// zero means L'' underflowed, which only happens deep in the tail.
  bool left_settled(double p) {
    const double f = curvature(p);
    return f >= 0.0 && near_asymptote(p, spec_.min_value());
  }

  bool right_settled(double p) {
    const double f = curvature(p);
    return f <= 0.0 && near_asymptote(p, spec_.max_value());
  }

  std::vector<sample> grid(double lo, double hi) {
    const auto cells = static_cast<std::int64_t>(std::ceil((hi - lo) * config_.grid_points_per_unit));
    std::vector<sample> out;
    out.reserve(static_cast<std::size_t>(cells) + 1);
    for (std::int64_t k = 0; k <= cells; ++k) {
      const double p = k == cells ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cells);
      out.push_back({p, curvature(p)});
    }
    return out;
  }

  /// Collects sign-change brackets between consecutive non-zero samples and
  /// probes same-sign cells whose midpoint dips toward zero.
  std::vector<std::pair<sample, sample>> brackets(const std::vector<sample>& samples) {
    std::vector<std::pair<sample, sample>> out;
    const sample* prev = nullptr;
    for (const auto& s : samples) {
      if (s.f == 0.0) continue;
      if (prev) {
        if (sign_of(prev->f) != sign_of(s.f))
          out.emplace_back(*prev, s);
        else
          densify(*prev, s, 0, out);
      }
      prev = &s;
    }
    return out;
  }

  /// Bisection to refine_tolerance; automatic mode repeats it in extended
  /// precision when the residual stays large against the bracket ends.
  InflectionPoint refine(const sample& a, const sample& b) {
    InflectionPoint root = bisect(a, b, false);
    if (config_.precision == precision_mode::automatic) {
      const double local = std::max(std::abs(a.f), std::abs(b.f));
      if (root.residual > 1e-3 * local) root = bisect(a, b, true);
    }
    return root;
  }

 private:
  void densify(const sample& a, const sample& b, int depth,
               std::vector<std::pair<sample, sample>>& out) {
    if (depth >= config_.densify_depth) return;
    const double pm = 0.5 * (a.p + b.p);
    if (pm <= a.p || pm >= b.p) return;
    const sample m{pm, curvature(pm)};
    if (m.f != 0.0 && sign_of(m.f) != sign_of(a.f)) {
      out.emplace_back(a, m);
      out.emplace_back(m, b);
      return;
    }
    const double scale = std::max(std::abs(a.f), std::abs(b.f));
    if (std::abs(m.f) < config_.densify_ratio * scale) {
      densify(a, m, depth + 1, out);
      densify(m, b, depth + 1, out);
    }
  }

  InflectionPoint bisect(sample lo, sample hi, bool extended) {
    auto eval = [&](double p) { return extended ? curvature_extended(p) : curvature(p); };
    const int lo_sign = sign_of(lo.f);
    double plo = lo.p, phi = hi.p;
    while (phi - plo > config_.refine_tolerance) {
      const double mid = 0.5 * (plo + phi);
      if (mid <= plo || mid >= phi) break;
      const double fm = eval(mid);
      if (fm == 0.0) {
        plo = phi = mid;
        break;
      }
      if (sign_of(fm) == lo_sign)
        plo = mid;
      else
        phi = mid;
    }
    const double p_star = 0.5 * (plo + phi);
    InflectionPoint root;
    root.p_star = p_star;
    root.bracket_lo = lo.p;
    root.bracket_hi = hi.p;
    root.residual = std::abs(eval(p_star));
    root.direction = lo_sign > 0 ? Direction::convex_to_concave : Direction::concave_to_convex;
    root.precision_used =
        extended || config_.precision == precision_mode::extended ? precision_mode::extended
                                                                   : precision_mode::standard;
    return root;
  }

  const MeanSpec& spec_;
  const ScanConfig& config_;
  CurvatureEvaluator curvature_;
  bool used_extended_ = false;
};

inline void finalize(InflectionReport& report, const ScanConfig& config) {
  auto& roots = report.roots;
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return a.p_star < b.p_star; });

  std::vector<InflectionPoint> kept;
  for (const auto& r : roots) {
    if (!kept.empty() && r.p_star - kept.back().p_star < 2.0 * config.refine_tolerance) {
      auto& prev = kept.back();
      prev.p_star = 0.5 * (prev.p_star + r.p_star);
      prev.bracket_hi = r.bracket_hi;
      prev.merged = true;
      report.warnings.push_back("merged two roots near p=" + std::to_string(prev.p_star) +
                                " closer than twice the refine tolerance");
      continue;
    }
    kept.push_back(r);
  }
  roots = std::move(kept);

  for (std::size_t i = 0; i < roots.size(); ++i) {
    const Direction expected = i % 2 == 0 ? Direction::convex_to_concave : Direction::concave_to_convex;
    if (roots[i].direction != expected) {
      report.warnings.push_back("sign pattern does not alternate at root " + std::to_string(i));
      break;
    }
  }
  report.parity_ok = roots.size() % 2 == 1;
}

}  // namespace detail

/// Locates every sign change of L'' on the real line.
///
/// The range grows from +-initial_half_width by expansion_factor (each side on
/// its own) until L'' is positive on the left, negative on the right, and L is
/// within asymptote_tolerance of min/max at both ends. The range is then
/// gridded, sign changes are bracketed (with local densification where |L''|
/// dips without changing sign) and refined by bisection.
inline InflectionReport find_inflections(const MeanSpec& spec, const ScanConfig& config = {}) {
  config.validate();
  if (spec.is_constant()) throw no_inflection_error("constant mean has no inflection points");

  detail::inflection_scanner scanner(spec, config);
  InflectionReport report;
  report.bound_j = count_bound(static_cast<std::int64_t>(spec.size())).j;

  double left = config.initial_half_width;
  while (left <= config.max_half_width && !scanner.left_settled(-left)) left *= config.expansion_factor;
  double right = config.initial_half_width;
  while (right <= config.max_half_width && !scanner.right_settled(right)) right *= config.expansion_factor;
  const bool exhausted = left > config.max_half_width || right > config.max_half_width;
  left = std::min(left, config.max_half_width);
  right = std::min(right, config.max_half_width);

  report.scan_lo = -left;
  report.scan_hi = right;
  const auto samples = scanner.grid(-left, right);
  for (const auto& [a, b] : scanner.brackets(samples)) report.roots.push_back(scanner.refine(a, b));
  detail::finalize(report, config);
  report.precision_used = scanner.used_extended() ? precision_mode::extended : precision_mode::standard;

  if (exhausted)
    throw range_exhausted_error("scan reached max half width without settling on the asymptotes",
                                std::move(report));
  if (report.roots.empty())
    throw range_exhausted_error("no sign change of L'' found on the scanned range", std::move(report));
  return report;
}

}  // namespace lehmer_mean
