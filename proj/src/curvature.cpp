#include "calabi/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace calabi {

namespace {

void require_admissible(const CalabiProfile& p) {
  for (std::size_t i = 0; i < p.du.size(); ++i)
    if (!(p.d2u[i] > 0) || !(p.du[i] > 0)) throw InadmissibleProfile("inadmissible profile");
}

void require_dimension(int n) {
  if (n < 2) throw std::invalid_argument("curvature: n must be >= 2");
}

// v' and v'' at node i, chain rule only.
Real dv_at(const CalabiProfile& p, int n, std::size_t i) {
  return n - (n - 1) * p.d2u[i] / p.du[i] - p.d3u[i] / p.d2u[i];
}

Real d2v_at(const CalabiProfile& p, int n, std::size_t i) {
  const Real h = p.d2u[i] / p.du[i];
  const Real g = p.d3u[i] / p.d2u[i];
  return -(n - 1) * (p.d3u[i] / p.du[i] - h * h) - (p.d4u[i] / p.d2u[i] - g * g);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
  return c;
}

}  // namespace

RicciPotentialSample ricci_potential(const CalabiProfile& p, int n) {
  require_dimension(n);
  require_admissible(p);
  const std::size_t N = p.du.size();
  RicciPotentialSample s;
  s.v.resize(N);
  s.dv.resize(N);
  s.d2v.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Real rho = p.grid.node(static_cast<int>(i));
    s.v[i] = to_double(n * rho - (n - 1) * qlog(p.du[i]) - qlog(p.d2u[i]));
    s.dv[i] = to_double(dv_at(p, n, i));
    s.d2v[i] = to_double(d2v_at(p, n, i));
  }
  return s;
}

RicciEigenvalues ricci_eigenvalues(const CalabiProfile& p, int n) {
  require_dimension(n);
  require_admissible(p);
  const std::size_t N = p.du.size();
  RicciEigenvalues e;
  e.lambda1.resize(N);
  e.lambda2.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    e.lambda1[i] = to_double(d2v_at(p, n, i) / p.d2u[i]);
    e.lambda2[i] = to_double(dv_at(p, n, i) / p.du[i]);
  }
  return e;
}

std::vector<double> scalar_curvature(const CalabiProfile& p, int n) {
  require_dimension(n);
  require_admissible(p);
  const std::size_t N = p.du.size();
  std::vector<double> R(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Real u1 = p.du[i], u2 = p.d2u[i], u3 = p.d3u[i], u4 = p.d4u[i];
    const Real val = -u4 / (u2 * u2) + u3 * u3 / (u2 * u2 * u2) - 2 * (n - 1) * u3 / (u1 * u2) -
                     Real((n - 1) * (n - 2)) * u2 / (u1 * u1) + Real(n * (n - 1)) / u1;
    R[i] = to_double(val);
  }
  return R;
}

BisectionalComponents bisectional_components(const CalabiProfile& p, int n) {
  require_dimension(n);
  require_admissible(p);
  const std::size_t N = p.du.size();
  BisectionalComponents b;
  b.r1111.resize(N);
  b.r11kk.resize(N);
  b.rkkkk.resize(N);
  if (n >= 3) b.rkkll.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Real u1 = p.du[i], u2 = p.d2u[i], u3 = p.d3u[i], u4 = p.d4u[i];
    b.r1111[i] = to_double((-u4 + u3 * u3 / u2) / (2 * u2 * u2));
    b.r11kk[i] = to_double((-u3 + u2 * u2 / u1) / (u1 * u2));
    const double flat = to_double((u1 - u2) / (u1 * u1));
    b.rkkkk[i] = flat;
    if (n >= 3) b.rkkll[i] = flat;
  }
  return b;
}

namespace {

std::vector<double> proxy_from(const RicciEigenvalues& e, const BisectionalComponents& b) {
  const std::size_t N = e.lambda1.size();
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    double m = std::max({std::abs(b.r1111[i]), std::abs(b.r11kk[i]), std::abs(b.rkkkk[i]),
                         std::abs(e.lambda1[i]), std::abs(e.lambda2[i])});
    if (!b.rkkll.empty()) m = std::max(m, std::abs(b.rkkll[i]));
    out[i] = m;
  }
  return out;
}

}  // namespace

std::vector<double> curvature_norm_proxy(const CalabiProfile& p, int n) {
  return proxy_from(ricci_eigenvalues(p, n), bisectional_components(p, n));
}

double sigma_k_value(double lambda1, double lambda2, int n, int k) {
  if (k < 1 || k > n) throw std::out_of_range("sigma_k: k must satisfy 1 <= k <= n");
  return binomial(n - 1, k) * std::pow(lambda2, k) +
         binomial(n - 1, k - 1) * lambda1 * std::pow(lambda2, k - 1);
}

std::vector<double> sigma_k(const CalabiProfile& p, int n, int k) {
  if (k < 1 || k > n) throw std::out_of_range("sigma_k: k must satisfy 1 <= k <= n");
  const RicciEigenvalues e = ricci_eigenvalues(p, n);
  std::vector<double> s(e.lambda1.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sigma_k_value(e.lambda1[i], e.lambda2[i], n, k);
  return s;
}

CurvatureSample sample_curvature(const CalabiProfile& p, int n) {
  CurvatureSample c;
  RicciEigenvalues e = ricci_eigenvalues(p, n);
  c.bisectional = bisectional_components(p, n);
  c.R = scalar_curvature(p, n);
  c.rm_proxy = proxy_from(e, c.bisectional);
  c.sigma.resize(static_cast<std::size_t>(n + 1));
  for (int k = 1; k <= n; ++k) {
    auto& s = c.sigma[k];
    s.resize(e.lambda1.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = sigma_k_value(e.lambda1[i], e.lambda2[i], n, k);
  }
  c.lambda1 = std::move(e.lambda1);
  c.lambda2 = std::move(e.lambda2);
  return c;
}

}  // namespace calabi
