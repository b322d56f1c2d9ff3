#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace lehmer_mean {

/// Software binary floating point with a `Bits`-bit mantissa.
template <unsigned Bits>
using extended_float = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<Bits, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

/// Working type of the extended-precision mode (quad-like, 128-bit mantissa).
using extended_real = extended_float<128>;

enum class precision_mode { standard, extended, automatic };

inline std::string_view to_string(precision_mode mode) {
  switch (mode) {
    case precision_mode::standard: return "standard";
    case precision_mode::extended: return "extended";
    case precision_mode::automatic: return "auto";
  }
  return "auto";
}

inline bool parse_precision_mode(std::string_view text, precision_mode& out) {
  if (text == "standard") out = precision_mode::standard;
  else if (text == "extended") out = precision_mode::extended;
  else if (text == "auto" || text == "automatic") out = precision_mode::automatic;
  else return false;
  return true;
}

/// Kahan-Babuska-Neumaier compensated accumulator.
template <typename Real>
class compensated_sum {
 public:
  compensated_sum() = default;
  explicit compensated_sum(Real init) : sum_(init) {}

  compensated_sum& operator+=(const Real& x) {
    using std::abs;
    const Real t = sum_ + x;
    if (abs(sum_) >= abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }

  Real value() const { return sum_ + comp_; }

 private:
  Real sum_{0};
  Real comp_{0};
};

template <typename Real>
Real to_real(double x) {
  return Real(x);
}

template <typename Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

}  // namespace lehmer_mean
