/**
 * Copyright 2026 The gphot authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace gphot {

using cdouble = std::complex<double>;

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Two series from incompatible contexts were combined.
class context_error : public error {
 public:
  explicit context_error(const std::string& what) : error(what) {}
};

/// Reciprocal/log/pow of a series whose constant term makes the operation
/// undefined, or a matrix whose pivots vanish at the expansion point.
class singular_error : public error {
 public:
  explicit singular_error(const std::string& what) : error(what) {}
};

/// Parameter outside its admissible range (negative squeezing, bad mode
/// index, exponent outside the truncation box, ...).
class domain_error : public error {
 public:
  explicit domain_error(const std::string& what) : error(what) {}
};

/// A state failed a physicality check (asymmetric or non-positive-definite
/// covariance), or a request is unphysical (subtracting from vacuum).
class physicality_error : public error {
 public:
  explicit physicality_error(const std::string& what) : error(what) {}
};

/// A numeric result failed an internal consistency check (imaginary residue
/// too large, probability too negative, diverging self-consistency loop).
class numeric_error : public error {
 public:
  explicit numeric_error(const std::string& what) : error(what) {}
};

namespace detail {
inline std::atomic<long long>& clamp_counter() {
  static std::atomic<long long> n{0};
  return n;
}
}  // namespace detail

/// Number of tiny negative probabilities clamped to zero so far.
inline long long clamped_negative_count() { return detail::clamp_counter().load(); }

/// Take the real part of a value that should be real up to rounding.
/// Throws numeric_error when |imag| > rel*|real| + abs.
inline double real_checked(cdouble z, double rel = 1e-10, double abs_tol = 1e-14) {
  const double re = z.real(), im = std::abs(z.imag());
  if (im > rel * std::abs(re) + abs_tol)
    throw numeric_error("imaginary residue " + std::to_string(im) +
                        " too large for real-valued result " + std::to_string(re));
  return re;
}

/// Clamp rounding-level negative probabilities to zero; anything more
/// negative than -1e-12 is treated as a genuine numerical failure.
inline double clamp_probability(double p) {
  if (p < 0.0) {
    if (p < -1e-12)
      throw numeric_error("probability " + std::to_string(p) + " below clamping threshold");
    detail::clamp_counter().fetch_add(1);
    return 0.0;
  }
  return p;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace gphot
