#pragma once

#include <quadmath.h>

#include <string>
#include <string_view>
#include <vector>

namespace calabi {

// Profiles are stored and differentiated in binary128. Fourth derivatives of
// u near rho = +-L are ~1e-8 against |u| ~ 1e1, which is below double
// resolution once divided by (u'')^2.
using Real = __float128;
using RealVector = std::vector<Real>;

inline Real qlog(Real x) { return logq(x); }
inline Real qexp(Real x) { return expq(x); }
inline Real qsqrt(Real x) { return sqrtq(x); }
inline Real qabs(Real x) { return fabsq(x); }
inline Real qlog1p(Real x) { return log1pq(x); }
inline Real qpow(Real x, Real y) { return powq(x, y); }
inline Real qmax(Real x, Real y) { return x > y ? x : y; }
inline Real qmin(Real x, Real y) { return x < y ? x : y; }

// Overflow-safe logistic 1/(1+e^{-x}).
inline Real qlogistic(Real x) {
  if (x >= 0) return 1 / (1 + expq(-x));
  const Real e = expq(x);
  return e / (1 + e);
}

// log(1 + e^x) without overflow.
inline Real qsoftplus(Real x) {
  if (x > 0) return x + log1pq(expq(-x));
  return log1pq(expq(x));
}

inline double to_double(Real x) { return static_cast<double>(x); }

std::vector<double> to_double(const RealVector& v);
RealVector to_real(const std::vector<double>& v);

// Shortest-safe decimal with 36 significant digits (round-trips binary128).
std::string format_real(Real x);

// Throws std::invalid_argument on malformed input.
Real parse_real(std::string_view text);

}  // namespace calabi
