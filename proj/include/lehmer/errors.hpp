#pragma once

#include <stdexcept>
#include <string>

namespace lehmer_mean {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside the function's domain (negative value, non-finite p, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// The inputs do not describe a usable mean (nothing left after dropping zeros).
class invalid_spec_error : public error {
 public:
  using error::error;
};

/// An operation was called on a spec of the wrong shape (e.g. n != 3).
class usage_error : public error {
 public:
  using error::error;
};

/// A closed form is undefined for the given inputs (e.g. x_1 == x_2).
class degenerate_error : public error {
 public:
  using error::error;
};

/// Constant spec: L'' vanishes identically, so there is nothing to locate.
class no_inflection_error : public error {
 public:
  using error::error;
};

}  // namespace lehmer_mean
