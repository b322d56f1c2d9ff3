#pragma once

// Test-only reference implementations. They evaluate the defining formulas
// directly (raw power sums in long double, no log-domain shifting) and are
// independent of the library's evaluation path.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// sum w x^p / sum w x^(p-1) by direct summation.
inline long double lehmer(const std::vector<double>& x, long double p, const std::vector<double>& w = {}) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double wi = w.empty() ? 1.0L : w[i];
    num += wi * std::pow(static_cast<long double>(x[i]), p);
    den += wi * std::pow(static_cast<long double>(x[i]), p - 1);
  }
  return num / den;
}

/// sum w x^p (log x)^k / sum w x^p by direct summation.
inline long double log_moment(const std::vector<double>& x, long double p, int k) {
  long double num = 0, den = 0;
  for (double xi : x) {
    const long double t = std::pow(static_cast<long double>(xi), p);
    num += t * std::pow(std::log(static_cast<long double>(xi)), k);
    den += t;
  }
  return num / den;
}

/// Central first difference of the direct-sum mean.
inline double fd_first(const std::vector<double>& x, double p, double h = 1e-5) {
  return static_cast<double>((lehmer(x, p + h) - lehmer(x, p - h)) / (2.0L * h));
}

/// Fixed-seed generator for property loops.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  std::vector<double> values(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = log_uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace oracle
