#pragma once

#include <vector>

#include "calabi/profile.hpp"

namespace calabi {

// Closed-form curvature of the Calabi metric, evaluated nodewise from the
// stored u-derivatives in binary128, returned in double. At p = (z_1,0,..,0)
// the metric is e^{-rho} diag(u'', u', .., u') and Ricci is
// e^{-rho} diag(v'', v', .., v'). Every normalized quantity below is
// homogeneous of degree -1 under u -> K u.

struct RicciPotentialSample {
  std::vector<double> v, dv, d2v;
};

struct RicciEigenvalues {
  std::vector<double> lambda1;  ///< fiber direction, v''/u''
  std::vector<double> lambda2;  ///< multiplicity n-1, v'/u'
};

/// Bisectional components divided by their Q = g g + g g normalizers.
/// rkkkk drops the factor 2 carried by both R_kkkk and Q_kkkk, so
/// rkkkk == rkkll identically. rkkll is empty for n = 2.
struct BisectionalComponents {
  std::vector<double> r1111, r11kk, rkkkk, rkkll;
};

struct CurvatureSample {
  std::vector<double> lambda1, lambda2, R;
  BisectionalComponents bisectional;
  std::vector<std::vector<double>> sigma;  ///< sigma[k] for 1 <= k <= n; sigma[0] empty
  std::vector<double> rm_proxy;
};

/// Throws InadmissibleProfile("inadmissible profile") if u' or u'' <= 0 anywhere.
RicciPotentialSample ricci_potential(const CalabiProfile& p, int n);
RicciEigenvalues ricci_eigenvalues(const CalabiProfile& p, int n);

/// Trace formula written directly in u', .., u'''' (independent of the
/// eigenvalue route).
std::vector<double> scalar_curvature(const CalabiProfile& p, int n);

BisectionalComponents bisectional_components(const CalabiProfile& p, int n);

/// Nodewise max of |r1111|, |r11kk|, |rkkkk|, |rkkll|, |lambda1|, |lambda2|.
std::vector<double> curvature_norm_proxy(const CalabiProfile& p, int n);

/// sigma_k(lambda1, lambda2 x (n-1)). Throws std::out_of_range unless 1 <= k <= n.
std::vector<double> sigma_k(const CalabiProfile& p, int n, int k);

/// Elementary symmetric polynomial for eigenvalues (lambda1, lambda2 repeated n-1 times).
double sigma_k_value(double lambda1, double lambda2, int n, int k);

CurvatureSample sample_curvature(const CalabiProfile& p, int n);

}  // namespace calabi
