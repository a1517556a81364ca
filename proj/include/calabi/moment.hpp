#pragma once

#include <vector>

#include "calabi/profile.hpp"

namespace calabi {

/// phi(x) = u'' as a function of the moment coordinate x = u' on (a, b).
/// Nodes carry phi and its exact x-derivative dphi = u'''/u''.
class MomentProfile {
 public:
  MomentProfile() = default;
  /// Requires strictly increasing x. Throws InadmissibleProfile otherwise.
  MomentProfile(std::vector<double> x, std::vector<double> phi, std::vector<double> dphi,
                double left_end, double right_end);

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& dphi() const { return dphi_; }
  std::size_t size() const { return x_.size(); }

  /// Class endpoints; phi vanishes there in the limit sense.
  double left_end() const { return left_end_; }
  double right_end() const { return right_end_; }
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  double left_slope() const { return dphi_.front(); }
  double right_slope() const { return dphi_.back(); }

  /// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson limited
  /// node slopes) and its derivative. Throws std::out_of_range outside
  /// [x_min, x_max].
  double value(double x) const;
  double slope(double x) const;

  /// (x, phi) -> (s x, s phi); slopes unchanged.
  MomentProfile scaled(double s) const;

 private:
  std::size_t locate(double x) const;

  std::vector<double> x_, phi_, dphi_;
  std::vector<double> knot_slope_;  // limited slopes used by the interpolant
  double left_end_ = 0, right_end_ = 0;
};

/// Reparametrizes an admissible profile by x = u'. Throws InadmissibleProfile
/// ("profile not admissible") unless u' is strictly increasing and u'' > 0.
MomentProfile to_moment_profile(const CalabiProfile& p);

}  // namespace calabi
