#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lehmer/errors.hpp"
#include "lehmer/numeric.hpp"

namespace lehmer_mean {

/// Positive values x_1..x_n with positive weights w_1..w_n defining
///   L(p) = sum w_i x_i^p / sum w_i x_i^(p-1).
/// Immutable once built; use make_spec() to construct one.
class MeanSpec {
 public:
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> log_values() const { return log_values_; }
  std::span<const double> log_weights() const { return log_weights_; }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  bool unit_weights() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
  }

  /// True when every value is identical, so L(p) is constant.
  bool is_constant() const { return min_value() == max_value(); }

  friend bool operator==(const MeanSpec& a, const MeanSpec& b) {
    return a.values_ == b.values_ && a.weights_ == b.weights_;
  }

 private:
  friend MeanSpec make_spec(std::span<const double>, std::optional<std::span<const double>>);

  MeanSpec(std::vector<double> values, std::vector<double> weights)
      : values_(std::move(values)), weights_(std::move(weights)) {
    log_values_.reserve(values_.size());
    log_weights_.reserve(weights_.size());
    for (double x : values_) log_values_.push_back(std::log(x));
    for (double w : weights_) log_weights_.push_back(std::log(w));
  }

  std::vector<double> values_;
  std::vector<double> weights_;
  std::vector<double> log_values_;
  std::vector<double> log_weights_;
};

/// One evaluated point of the mean function.
struct MeanValue {
  double p;
  double value;
};

/// Builds a spec from non-negative values. Zero values are dropped together
/// with their weights; weights default to one.
inline MeanSpec make_spec(std::span<const double> values,
                          std::optional<std::span<const double>> weights = std::nullopt) {
  if (weights && weights->size() != values.size())
    throw usage_error("weights must have the same length as values");

  std::vector<double> xs;
  std::vector<double> ws;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = values[i];
    if (!std::isfinite(x)) throw domain_error("values must be finite");
    if (x < 0.0) throw domain_error("values must be non-negative");
    const double w = weights ? (*weights)[i] : 1.0;
    if (!std::isfinite(w) || !(w > 0.0)) throw domain_error("weights must be positive and finite");
    if (x == 0.0) continue;
    xs.push_back(x);
    ws.push_back(w);
  }
  if (xs.empty()) throw invalid_spec_error("at least one value must be positive");
  return MeanSpec(std::move(xs), std::move(ws));
}

inline MeanSpec make_spec(std::initializer_list<double> values) {
  return make_spec(std::span<const double>(values.begin(), values.size()));
}

inline MeanSpec make_spec(std::initializer_list<double> values, std::initializer_list<double> weights) {
  return make_spec(std::span<const double>(values.begin(), values.size()),
                   std::span<const double>(weights.begin(), weights.size()));
}

/// Multiplies every value by c > 0; L scales by the same factor.
inline MeanSpec scale(const MeanSpec& spec, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw domain_error("scale factor must be positive");
  std::vector<double> xs(spec.values().begin(), spec.values().end());
  for (double& x : xs) x *= c;
  return make_spec(xs, spec.weights());
}

/// Merges bitwise-equal values into one term carrying the summed weight.
/// Not applied by default: a spec is a multiset.
inline MeanSpec normalize(const MeanSpec& spec) {
  std::map<double, double> merged;
  for (std::size_t i = 0; i < spec.size(); ++i) merged[spec.values()[i]] += spec.weights()[i];
  std::vector<double> xs, ws;
  for (const auto& [x, w] : merged) {
    xs.push_back(x);
    ws.push_back(w);
  }
  return make_spec(xs, ws);
}

namespace detail {

/// Log-domain view of a spec in working precision Real.
template <typename Real>
struct kernel {
  std::vector<Real> x;
  std::vector<Real> log_x;
  std::vector<Real> log_w;

  explicit kernel(const MeanSpec& spec) {
    using std::log;
    const std::size_t n = spec.size();
    x.reserve(n);
    log_x.reserve(n);
    log_w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      x.emplace_back(spec.values()[i]);
      if constexpr (std::is_same_v<Real, double>) {
        log_x.push_back(spec.log_values()[i]);
        log_w.push_back(spec.log_weights()[i]);
      } else {
        log_x.push_back(log(Real(spec.values()[i])));
        log_w.push_back(log(Real(spec.weights()[i])));
      }
    }
  }

  std::size_t size() const { return x.size(); }

  /// Softmax weights proportional to w_i x_i^q, shifted by their maximum
  /// exponent so the largest is exactly one. Not normalized.
  void shifted_weights(const Real& q, std::vector<Real>& out) const {
    using std::exp;
    out.resize(size());
    Real top = log_w[0] + q * log_x[0];
    for (std::size_t i = 0; i < size(); ++i) {
      out[i] = log_w[i] + q * log_x[i];
      if (out[i] > top) top = out[i];
    }
    for (auto& e : out) e = exp(e - top);
  }

  /// L(p) = 1 / E_p[1/x], the p-weighted harmonic mean.
  Real mean(const Real& p) const {
    std::vector<Real> e;
    shifted_weights(p, e);
    compensated_sum<Real> num, den;
    for (std::size_t i = 0; i < size(); ++i) {
      num += e[i];
      den += e[i] / x[i];
    }
    return num.value() / den.value();
  }
};

inline void require_finite(double p) {
  if (!std::isfinite(p)) throw domain_error("exponent p must be finite");
}

}  // namespace detail

/// L(p) in working precision Real, clamped to [min x, max x].
template <typename Real>
Real lehmer_value(const MeanSpec& spec, const Real& p) {
  const Real value = detail::kernel<Real>(spec).mean(p);
  const Real lo(spec.min_value()), hi(spec.max_value());
  return value < lo ? lo : (value > hi ? hi : value);
}

/// Evaluates the Lehmer mean at p. Sums are shifted in the log domain so
/// |p| in the thousands neither overflows nor underflows.
inline MeanValue lehmer(const MeanSpec& spec, double p) {
  detail::require_finite(p);
  return {p, lehmer_value<double>(spec, p)};
}

/// Horizontal asymptotes: (min x_i, max x_i) for p -> -inf and p -> +inf.
inline std::pair<double, double> asymptotes(const MeanSpec& spec) {
  return {spec.min_value(), spec.max_value()};
}

}  // namespace lehmer_mean
