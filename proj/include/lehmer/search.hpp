#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "lehmer/errors.hpp"
#include "lehmer/inflection.hpp"
#include "lehmer/mean_core.hpp"

namespace lehmer_mean {

/// Values log-uniform on [lo, hi].
struct LogUniform {
  double lo = 0.5;
  double hi = 2.0;
};

/// n-1 values normal around `center` with sd `spread` (truncated at three
/// spreads), plus one outlier uniform on [outlier_lo, outlier_hi], last.
struct Cluster {
  double center = 1.025;
  double spread = 0.002;
  double outlier_lo = 0.9;
  double outlier_hi = 0.99;
};

/// Always the same values; replays a known instance.
struct Pinned {
  std::vector<double> values;
};

using ValueDistribution = std::variant<LogUniform, Cluster, Pinned>;

struct SearchConfig {
  int n = 4;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  ValueDistribution distribution = Cluster{};
  std::size_t min_roots = 3;
  ScanConfig scan{};
  /// Worker threads; output does not depend on this.
  unsigned threads = 1;

  void validate() const {
    if (trials < 1) throw usage_error("trials must be at least 1");
    scan.validate();
    std::visit(
        [this](const auto& d) {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, Pinned>) {
            if (d.values.size() < 2) throw usage_error("pinned instance needs at least two values");
          } else {
            if (n < 2) throw usage_error("n must be at least 2");
            if constexpr (std::is_same_v<D, LogUniform>) {
              if (!(d.lo > 0.0 && d.lo < d.hi)) throw usage_error("log-uniform bounds need 0 < lo < hi");
            } else {
              if (!(d.spread > 0.0)) throw usage_error("cluster spread must be positive");
              if (!(d.center - 3.0 * d.spread > 0.0)) throw usage_error("cluster must stay positive");
              if (!(d.outlier_lo > 0.0 && d.outlier_lo < d.outlier_hi))
                throw usage_error("outlier bounds need 0 < lo < hi");
            }
          }
        },
        distribution);
  }
};

struct SearchHit {
  MeanSpec spec;
  InflectionReport report;
  std::int64_t trial_index;
};

struct SearchOutcome {
  std::vector<SearchHit> hits;
  std::int64_t trials = 0;
  /// Trials whose scan hit max_half_width; they never count as hits.
  std::int64_t exhausted = 0;
  std::size_t best_root_count = 0;
};

/// Counter-based generator: the stream is a pure function of (seed, trial),
/// independent of scheduling and of the standard library's distributions.
class TrialStream {
 public:
  TrialStream(std::uint64_t seed, std::uint64_t trial)
      : key_(mix(mix(seed) ^ (trial * 0xD1B54A32D192ED03ull + 0x9E3779B97F4A7C15ull))) {}

  std::uint64_t next() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline MeanSpec random_instance(const SearchConfig& config, std::int64_t trial) {
  TrialStream rng(config.seed, static_cast<std::uint64_t>(trial));
  std::vector<double> values;
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, Pinned>) {
          values = d.values;
        } else if constexpr (std::is_same_v<D, LogUniform>) {
          const double a = std::log(d.lo), b = std::log(d.hi);
          for (int i = 0; i < config.n; ++i) values.push_back(std::clamp(std::exp(rng.uniform(a, b)), d.lo, d.hi));
        } else {
          for (int i = 0; i + 1 < config.n; ++i) {
            double z = rng.normal();
            while (std::abs(z) > 3.0) z = rng.normal();
            values.push_back(d.center + d.spread * z);
          }
          values.push_back(rng.uniform(d.outlier_lo, d.outlier_hi));
        }
      },
      config.distribution);
  return make_spec(values);
}

namespace detail {

inline std::optional<SearchHit> run_trial(const SearchConfig& config, std::int64_t trial,
                                          std::size_t& roots, bool& exhausted) {
  MeanSpec spec = random_instance(config, trial);
  roots = 0;
  exhausted = false;
  if (spec.is_constant()) return std::nullopt;
  try {
    InflectionReport report = find_inflections(spec, config.scan);
    roots = report.count();
    if (roots >= config.min_roots) return SearchHit{std::move(spec), std::move(report), trial};
  } catch (const range_exhausted_error&) {
    exhausted = true;
  }
  return std::nullopt;
}

}  // namespace detail

/// Runs every trial, returning hits ordered by trial index together with
/// summary counts.
inline SearchOutcome run_search(const SearchConfig& config) {
  config.validate();
  const auto trials = static_cast<std::size_t>(config.trials);
  std::vector<std::optional<SearchHit>> slots(trials);
  std::vector<std::size_t> roots(trials, 0);
  std::vector<char> exhausted(trials, 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      bool ex = false;
      slots[t] = detail::run_trial(config, static_cast<std::int64_t>(t), roots[t], ex);
      exhausted[t] = ex;
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(trials)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  SearchOutcome outcome;
  outcome.trials = config.trials;
  for (std::size_t t = 0; t < trials; ++t) {
    outcome.best_root_count = std::max(outcome.best_root_count, roots[t]);
    outcome.exhausted += exhausted[t];
    if (slots[t]) outcome.hits.push_back(std::move(*slots[t]));
  }
  return outcome;
}

/// Randomized hunt for instances with at least min_roots inflection points.
/// An empty result is a legitimate outcome.
inline std::vector<SearchHit> search_multi_inflection(const SearchConfig& config) {
  return run_search(config).hits;
}

}  // namespace lehmer_mean
