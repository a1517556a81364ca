#include "calabi/real.hpp"

#include <cerrno>
#include <stdexcept>

namespace calabi {

std::vector<double> to_double(const RealVector& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

RealVector to_real(const std::vector<double>& v) {
  return RealVector(v.begin(), v.end());
}

std::string format_real(Real x) {
  char buf[64];
  const int len = quadmath_snprintf(buf, sizeof buf, "%.35Qe", x);
  if (len < 0 || len >= static_cast<int>(sizeof buf))
    throw std::runtime_error("format_real: formatting failed");
  return std::string(buf, static_cast<std::size_t>(len));
}

Real parse_real(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw std::invalid_argument("parse_real: empty number");
  char* end = nullptr;
  errno = 0;
  const Real v = strtoflt128(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw std::invalid_argument("parse_real: malformed number '" + s + "'");
  return v;
}

}  // namespace calabi
