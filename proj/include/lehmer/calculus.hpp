#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <type_traits>
#include <vector>

#include "lehmer/errors.hpp"
#include "lehmer/mean_core.hpp"
#include "lehmer/numeric.hpp"

namespace lehmer_mean {

/// The p-independent term K of the three-value second derivative.
struct N3Constant {
  double k;
};

/// RHS - LHS of the three inequalities implied by the log-moment ordering
/// for n = 3. All three are non-negative.
struct N3Slacks {
  double a;
  double b;
  double c;
};

/// One evaluation of L''(p) together with its conditioning.
struct CurvatureSample {
  double value;
  /// Total magnitude of the summed terms.
  double scale;
  /// Decimal digits lost to cancellation, log10(scale / |value|).
  double digits_lost;
  precision_mode used;
};

/// Cancellation (in decimal digits) above which automatic mode recomputes
/// L'' in extended precision; keeps the double result good to ~1e-10.
inline constexpr double kEscalationDigits = 5.0;

namespace detail {

template <typename Real>
Real normalized_moment(const std::vector<Real>& e, const std::vector<Real>& y, int k) {
  compensated_sum<Real> num, den;
  for (std::size_t i = 0; i < e.size(); ++i) {
    Real term = e[i];
    for (int j = 0; j < k; ++j) term *= y[i];
    num += term;
    den += e[i];
  }
  return num.value() / den.value();
}

template <typename Real>
struct curvature_terms {
  Real value;
  /// Sum of the term magnitudes, with |s_i + s_j| taken as |s_i| + |s_j|.
  Real scale;
};

/// log(x_i / x_j). For nearby values the difference of rounded logs carries an
/// absolute error of a few ulps of log x; log1p of the exact difference keeps
/// full relative accuracy instead.
template <typename Real>
Real log_ratio(const kernel<Real>& ker, std::size_t i, std::size_t j) {
  if constexpr (std::is_same_v<Real, double>) {
    const double d = ker.x[i] - ker.x[j];
    if (std::abs(d) < 0.5 * ker.x[j]) return std::log1p(d / ker.x[j]);
  }
  return ker.log_x[i] - ker.log_x[j];
}

/// L''(p) as a pairwise sum under the normalized (p-1)-weights q:
///
///   L'' = sum_{i<j} q_i q_j (x_i - x_j)(l_i - l_j)(s_i + s_j),
///   s_i = sum_k q_k (l_i - l_k) = l_i - m1(p-1),
///
/// with l = log x. This is the log-moment expression
///   L [m2(p) - m2(p-1) - 2 m1(p-1)(m1(p) - m1(p-1))]
/// with each moment difference folded into one sum, so nearly equal values
/// no longer cancel against each other.
template <typename Real>
curvature_terms<Real> second_derivative_terms(const kernel<Real>& ker, const Real& p) {
  using std::abs;
  const std::size_t n = ker.size();
  std::vector<Real> q;
  ker.shifted_weights(p - Real(1), q);
  compensated_sum<Real> total;
  for (const auto& v : q) total += v;
  const Real norm = total.value();
  for (auto& v : q) v /= norm;

  std::vector<Real> d(n * n, Real(0)), s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = log_ratio(ker, i, j);
      d[j * n + i] = -d[i * n + j];
    }
  for (std::size_t i = 0; i < n; ++i) {
    compensated_sum<Real> acc;
    for (std::size_t k = 0; k < n; ++k) acc += q[k] * d[i * n + k];
    s[i] = acc.value();
  }

  compensated_sum<Real> value, scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Real t = q[i] * q[j] * (ker.x[i] - ker.x[j]) * d[i * n + j];
      value += t * (s[i] + s[j]);
      scale += abs(t) * (abs(s[i]) + abs(s[j]));
    }
  return {value.value(), scale.value()};
}

inline double digits_lost(double bracket, double scale) {
  if (scale == 0.0) return 0.0;
  if (bracket == 0.0) return std::numeric_limits<double>::infinity();
  return std::log10(scale / std::abs(bracket));
}

inline void require_n3(const MeanSpec& spec) {
  if (spec.size() != 3 || !spec.unit_weights())
    throw usage_error("operation requires exactly three values with unit weights");
}

}  // namespace detail

/// Reusable L'' evaluator for one spec. Holds the double kernel and builds
/// the extended one on first use.
class CurvatureEvaluator {
 public:
  explicit CurvatureEvaluator(const MeanSpec& spec) : spec_(spec), standard_(spec) {}

  CurvatureSample operator()(double p, precision_mode mode = precision_mode::automatic) const {
    if (mode != precision_mode::extended) {
      const auto r = detail::second_derivative_terms(standard_, p);
      const double lost = detail::digits_lost(r.value, r.scale);
      if (mode == precision_mode::standard || lost <= kEscalationDigits)
        return {r.value, r.scale, lost, precision_mode::standard};
    }
    return extended(p);
  }

  CurvatureSample extended(double p) const {
    if (!extended_) extended_.emplace(spec_);
    const auto r = detail::second_derivative_terms(*extended_, extended_real(p));
    const double value = to_double(r.value);
    const double scale = to_double(r.scale);
    return {value, scale, detail::digits_lost(value, scale), precision_mode::extended};
  }

  const MeanSpec& spec() const { return spec_; }

 private:
  MeanSpec spec_;
  detail::kernel<double> standard_;
  mutable std::optional<detail::kernel<extended_real>> extended_;
};

/// Weighted average of (log x_i)^k under weights proportional to w_i x_i^p.
inline double log_moment(const MeanSpec& spec, double p, int k) {
  detail::require_finite(p);
  if (k < 0 || k > 2) throw usage_error("log-moment order must be 0, 1 or 2");
  detail::kernel<double> ker(spec);
  std::vector<double> e;
  ker.shifted_weights(p, e);
  return detail::normalized_moment(e, ker.log_x, k);
}

/// L'(p) = L(p) [m1(p) - m1(p-1)].
///
/// Evaluated as the equivalent pairwise covariance under the (p-1)-weights q,
///   sum_{i<j} q_i q_j (x_i - x_j)(log x_i - log x_j),
/// whose terms are all non-negative, so the result is never negative and is
/// exactly zero when all values coincide.
inline double first_derivative(const MeanSpec& spec, double p) {
  detail::require_finite(p);
  detail::kernel<double> ker(spec);
  std::vector<double> e;
  ker.shifted_weights(p - 1.0, e);
  compensated_sum<double> total;
  for (double v : e) total += v;
  const double norm = total.value();
  compensated_sum<double> acc;
  for (std::size_t i = 0; i < ker.size(); ++i)
    for (std::size_t j = i + 1; j < ker.size(); ++j)
      acc += (e[i] / norm) * (e[j] / norm) * (ker.x[i] - ker.x[j]) * (ker.log_x[i] - ker.log_x[j]);
  return acc.value();
}

/// L''(p) with the evaluation details.
inline CurvatureSample second_derivative_sample(const MeanSpec& spec, double p,
                                                precision_mode mode = precision_mode::automatic) {
  detail::require_finite(p);
  return CurvatureEvaluator(spec)(p, mode);
}

/// L''(p) = L(p) [m2(p) - m2(p-1) - 2 m1(p-1) (m1(p) - m1(p-1))].
inline double second_derivative(const MeanSpec& spec, double p,
                                precision_mode mode = precision_mode::automatic) {
  return second_derivative_sample(spec, p, mode).value;
}

/// Central second difference of L, with L evaluated in Real (extended by
/// default so round-off stays far below the O(h^2) truncation error).
template <typename Real = extended_real>
double fd_second_derivative(const MeanSpec& spec, double p, double h = 1e-4) {
  detail::require_finite(p);
  if (!(h > 0.0)) throw domain_error("finite-difference step must be positive");
  const detail::kernel<Real> ker(spec);
  const Real rp(p), rh(h);
  const Real d = ker.mean(rp + rh) - Real(2) * ker.mean(rp) + ker.mean(rp - rh);
  return to_double(Real(d / (rh * rh)));
}

/// Closed form for two unit-weight values, with a = x_1 / x_2:
///   L''(p) = x_1 (a - 1) (log a)^2 a^p (a - a^p) / (a^p + a)^3.
/// Rewritten with logistic factors so large |p| cannot overflow.
inline double second_derivative_n2(const MeanSpec& spec, double p) {
  detail::require_finite(p);
  if (spec.size() != 2 || !spec.unit_weights())
    throw usage_error("operation requires exactly two values with unit weights");
  const double x1 = spec.values()[0];
  const double a = x1 / spec.values()[1];
  const double r = spec.log_values()[0] - spec.log_values()[1];
  if (r == 0.0) return 0.0;
  const double s = p * r;
  // u = a^p / (a^p + a), (a - a^p) / (a^p + a) = tanh((r - s) / 2)
  const double u = 1.0 / (1.0 + std::exp(r - s));
  const double hi = std::max(r, s);
  const double log_denominator = hi + std::log1p(std::exp(std::min(r, s) - hi));
  return x1 * (a - 1.0) * r * r * u * std::tanh(0.5 * (r - s)) * std::exp(-log_denominator);
}

/// K = (x1-x2) log(x1/x2) log(x1 x2/x3^2) + (x1-x3) log(x1/x3) log(x1 x3/x2^2)
///   + (x2-x3) log(x2/x3) log(x2 x3/x1^2).
inline N3Constant k_constant(const MeanSpec& spec) {
  detail::require_n3(spec);
  const auto x = spec.values();
  const auto l = spec.log_values();
  compensated_sum<double> k;
  k += (x[0] - x[1]) * (l[0] - l[1]) * (l[0] + l[1] - 2.0 * l[2]);
  k += (x[0] - x[2]) * (l[0] - l[2]) * (l[0] + l[2] - 2.0 * l[1]);
  k += (x[1] - x[2]) * (l[1] - l[2]) * (l[1] + l[2] - 2.0 * l[0]);
  return {k.value()};
}

namespace detail {

/// Coefficients of the three exponential differences in L~(p); term t is
///   (exp((p-1) up[t]) - exp((p-1) down[t])) * coef[t].
struct n3_terms {
  double up[3];
  double down[3];
  double coef[3];
};

inline n3_terms make_n3_terms(const MeanSpec& spec) {
  const auto x = spec.values();
  const auto l = spec.log_values();
  const double l12 = l[0] - l[1], l13 = l[0] - l[2], l23 = l[1] - l[2];
  return {{l[1] - l[2], l[2] - l[1], l[2] - l[0]},
          {l[0] - l[2], l[0] - l[1], l[1] - l[0]},
          {(x[0] - x[1]) * l12 * l12, (x[0] - x[2]) * l13 * l13, (x[1] - x[2]) * l23 * l23}};
}

}  // namespace detail

/// The bracketed factor of the three-value second derivative, K included.
/// Strictly decreasing in p for pairwise-distinct values.
inline double tilde_l(const MeanSpec& spec, double p) {
  detail::require_n3(spec);
  detail::require_finite(p);
  const auto t = detail::make_n3_terms(spec);
  const double q = p - 1.0;
  compensated_sum<double> acc(k_constant(spec).k);
  for (int i = 0; i < 3; ++i) {
    acc += std::exp(q * t.up[i]) * t.coef[i];
    acc += -std::exp(q * t.down[i]) * t.coef[i];
  }
  return acc.value();
}

/// L''(p) for three unit-weight values as
///   (x1 x2 x3)^(p-1) / (x1^(p-1) + x2^(p-1) + x3^(p-1))^3 * L~(p),
/// with the prefactor folded into every exponential term in the log domain.
inline double second_derivative_n3(const MeanSpec& spec, double p) {
  detail::require_n3(spec);
  detail::require_finite(p);
  const auto l = spec.log_values();
  const double q = p - 1.0;
  const double top = std::max({q * l[0], q * l[1], q * l[2]});
  const double lse = top + std::log(std::exp(q * l[0] - top) + std::exp(q * l[1] - top) +
                                    std::exp(q * l[2] - top));
  const double log_prefactor = q * (l[0] + l[1] + l[2]) - 3.0 * lse;
  const auto t = detail::make_n3_terms(spec);
  compensated_sum<double> acc(std::exp(log_prefactor) * k_constant(spec).k);
  for (int i = 0; i < 3; ++i) {
    acc += std::exp(log_prefactor + q * t.up[i]) * t.coef[i];
    acc += -std::exp(log_prefactor + q * t.down[i]) * t.coef[i];
  }
  return acc.value();
}

/// d/dp L~(p), in the grouped form whose three brackets are bounded by the
/// n = 3 inequalities; never positive.
inline double tilde_l_prime(const MeanSpec& spec, double p) {
  detail::require_n3(spec);
  detail::require_finite(p);
  const auto x = spec.values();
  const auto l = spec.log_values();
  const double q = p - 1.0;
  const double l21 = l[1] - l[0], l23 = l[1] - l[2], l31 = l[2] - l[0], l32 = l[2] - l[1];
  auto pw = [q](double log_ratio) { return std::exp(q * log_ratio); };
  compensated_sum<double> acc;
  acc += l21 * l23 * (pw(l23) * (x[0] - x[1]) * l21 + pw(l21) * (x[1] - x[2]) * l32);
  acc += l21 * l31 * (pw(-l31) * (x[0] - x[1]) * l21 + pw(-l21) * (x[0] - x[2]) * l31);
  acc += l31 * l32 * (pw(l32) * (x[0] - x[2]) * l31 + pw(l31) * (x[1] - x[2]) * l32);
  return acc.value();
}

/// Slacks (RHS - LHS) of the three n = 3 inequalities at p.
inline N3Slacks n3_inequalities(const MeanSpec& spec, double p) {
  detail::require_n3(spec);
  detail::require_finite(p);
  const auto x = spec.values();
  const auto l = spec.log_values();
  const double q = p - 1.0;
  const double l21 = l[1] - l[0], l23 = l[1] - l[2], l31 = l[2] - l[0], l32 = l[2] - l[1];
  auto pw = [q](double log_ratio) { return std::exp(q * log_ratio); };
  const double lhs_a = pw(l23) * (x[0] - x[1]) * l21 + pw(l21) * (x[1] - x[2]) * l32;
  const double lhs_b = pw(-l31) * (x[0] - x[1]) * l21 + pw(-l21) * (x[0] - x[2]) * l31;
  const double lhs_c = pw(l32) * (x[0] - x[2]) * l31 + pw(l31) * (x[1] - x[2]) * l32;
  return {(x[0] - x[2]) * -l31 - lhs_a, (x[1] - x[2]) * l23 - lhs_b, (x[0] - x[1]) * -l21 - lhs_c};
}

}  // namespace lehmer_mean
