#include "calabi/moment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calabi {

MomentProfile::MomentProfile(std::vector<double> x, std::vector<double> phi,
                             std::vector<double> dphi, double left_end, double right_end)
    : x_(std::move(x)),
      phi_(std::move(phi)),
      dphi_(std::move(dphi)),
      left_end_(left_end),
      right_end_(right_end) {
  if (x_.size() < 2 || phi_.size() != x_.size() || dphi_.size() != x_.size())
    throw std::invalid_argument("MomentProfile: need >= 2 samples of matching length");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw InadmissibleProfile("profile not admissible");

  // Fritsch-Carlson limiting of the supplied node slopes.
  knot_slope_ = dphi_;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double delta = (phi_[i + 1] - phi_[i]) / (x_[i + 1] - x_[i]);
    double& m0 = knot_slope_[i];
    double& m1 = knot_slope_[i + 1];
    if (delta == 0.0) {
      m0 = 0.0;
      m1 = 0.0;
      continue;
    }
    if (m0 * delta < 0) m0 = 0.0;
    if (m1 * delta < 0) m1 = 0.0;
    const double alpha = m0 / delta;
    const double beta = m1 / delta;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      m0 = tau * alpha * delta;
      m1 = tau * beta * delta;
    }
  }
}

std::size_t MomentProfile::locate(double x) const {
  if (!(x >= x_.front() && x <= x_.back()))
    throw std::out_of_range("MomentProfile: x outside sampled domain");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, x_.size() - 2);
}

double MomentProfile::value(double x) const {
  const std::size_t i = locate(x);
  const double dx = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / dx;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * phi_[i] + (s3 - 2 * s2 + s) * dx * knot_slope_[i] +
         (-2 * s3 + 3 * s2) * phi_[i + 1] + (s3 - s2) * dx * knot_slope_[i + 1];
}

double MomentProfile::slope(double x) const {
  const std::size_t i = locate(x);
  const double dx = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / dx;
  const double s2 = s * s;
  return (6 * s2 - 6 * s) / dx * phi_[i] + (3 * s2 - 4 * s + 1) * knot_slope_[i] +
         (-6 * s2 + 6 * s) / dx * phi_[i + 1] + (3 * s2 - 2 * s) * knot_slope_[i + 1];
}

MomentProfile MomentProfile::scaled(double s) const {
  if (!(s > 0)) throw std::invalid_argument("MomentProfile::scaled: factor must be positive");
  std::vector<double> x(x_), phi(phi_);
  for (auto& v : x) v *= s;
  for (auto& v : phi) v *= s;
  return MomentProfile(std::move(x), std::move(phi), dphi_, left_end_ * s, right_end_ * s);
}

MomentProfile to_moment_profile(const CalabiProfile& p) {
  const std::size_t N = p.du.size();
  std::vector<double> x(N), phi(N), dphi(N);
  for (std::size_t i = 0; i < N; ++i) {
    if (!(p.d2u[i] > 0) || (i > 0 && !(p.du[i] > p.du[i - 1])))
      throw InadmissibleProfile("profile not admissible");
    x[i] = to_double(p.du[i]);
    phi[i] = to_double(p.d2u[i]);
    dphi[i] = to_double(p.d3u[i] / p.d2u[i]);
  }
  return MomentProfile(std::move(x), std::move(phi), std::move(dphi), to_double(p.cls.a),
                       to_double(p.cls.b));
}

}  // namespace calabi
