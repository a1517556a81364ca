#include "calabi/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "calabi/curvature.hpp"
#include "json.hpp"

namespace calabi {

RescaledProfile rescale(const CalabiProfile& p, double K) {
  if (!(K > 0)) throw std::invalid_argument("rescale: K must be positive");
  RescaledProfile r;
  r.t = p.t;
  r.K = K;
  r.profile = p;
  const Real s = K;
  for (RealVector* v : {&r.profile.u, &r.profile.du, &r.profile.d2u, &r.profile.d3u, &r.profile.d4u})
    for (auto& x : *v) x *= s;
  r.profile.cls = p.cls.scaled(s);
  r.moment = to_moment_profile(r.profile);
  return r;
}

double self_similarity_distance(const MomentProfile& m1, const MomentProfile& m2, const Window& w,
                                int samples) {
  if (!(w.hi > w.lo)) throw std::invalid_argument("self_similarity_distance: empty window");
  if (samples < 2) throw std::invalid_argument("self_similarity_distance: need >= 2 samples");
  for (const MomentProfile* m : {&m1, &m2})
    if (w.lo < m->x_min() || w.hi > m->x_max())
      throw std::invalid_argument("self_similarity_distance: window outside moment domain");
  double d0 = 0, d1 = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = i + 1 == samples ? w.hi : w.lo + (w.hi - w.lo) * i / (samples - 1);
    d0 = std::max(d0, std::abs(m1.value(x) - m2.value(x)));
    d1 = std::max(d1, std::abs(m1.slope(x) - m2.slope(x)));
  }
  return d0 + d1;
}

double self_similarity_distance(const RescaledProfile& r1, const RescaledProfile& r2,
                                const Window& w, int samples) {
  return self_similarity_distance(r1.moment, r2.moment, w, samples);
}

SolitonFit soliton_residual(const MomentProfile& m, int n, double lambda,
                            const std::optional<Window>& window) {
  const auto& x = m.x();
  const auto& phi = m.phi();
  const auto& dphi = m.dphi();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!window || (x[i] >= window->lo && x[i] <= window->hi)) idx.push_back(i);
  if (idx.size() < 3) throw std::invalid_argument("soliton_residual: fewer than 3 nodes in window");

  const std::size_t M = idx.size();
  std::vector<double> w(M), base(M), xs(M);
  for (std::size_t q = 0; q < M; ++q) {
    const std::size_t i = idx[q];
    xs[q] = x[i];
    if (!(x[i] > 0)) throw std::invalid_argument("soliton_residual: needs x > 0");
    base[q] = n - (n - 1) * phi[i] / x[i] - dphi[i] - lambda * x[i];
  }
  for (std::size_t q = 0; q < M; ++q) {
    const double left = q > 0 ? xs[q] - xs[q - 1] : 0.0;
    const double right = q + 1 < M ? xs[q + 1] - xs[q] : 0.0;
    w[q] = (left + right) / 2;
  }
  // r = base + mu x - c; normal equations in (mu, c).
  double Sw = 0, Sx = 0, Sxx = 0, Sb = 0, Sxb = 0;
  for (std::size_t q = 0; q < M; ++q) {
    Sw += w[q];
    Sx += w[q] * xs[q];
    Sxx += w[q] * xs[q] * xs[q];
    Sb += w[q] * base[q];
    Sxb += w[q] * xs[q] * base[q];
  }
  const double det = Sxx * Sw - Sx * Sx;
  if (!(std::abs(det) > 1e-14 * Sxx * Sw))
    throw std::invalid_argument("soliton_residual: singular normal equations");
  // minimize sum w (base + mu x - c)^2
  const double mu = (-Sxb * Sw + Sx * Sb) / det;
  const double c = (Sxx * Sb - Sx * Sxb) / det;
  double ss = 0;
  for (std::size_t q = 0; q < M; ++q) {
    const double r = base[q] + mu * xs[q] - c;
    ss += w[q] * r * r;
  }
  SolitonFit fit;
  fit.lambda = lambda;
  fit.mu = mu;
  fit.c = c;
  fit.residual_rms = std::sqrt(ss / Sw);
  fit.nodes = M;
  return fit;
}

MomentProfile fik_reference(int n, int k, double a_hat, double x_max, int samples) {
  if (n < 2 || k < 1) throw std::invalid_argument("fik_reference: need n >= 2, k >= 1");
  if (k >= n) throw std::invalid_argument("no shrinker in this range");
  if (!(a_hat > 0)) throw std::invalid_argument("fik_reference: a_hat must be positive");
  if (!(x_max > a_hat) || samples < 2)
    throw std::invalid_argument("fik_reference: need x_max > a_hat and >= 2 samples");
  std::vector<double> x(samples), phi(samples), dphi(samples);
  const double an = std::pow(a_hat, n);
  const double kn = static_cast<double>(k) / n;
  for (int i = 0; i < samples; ++i) {
    const double xi = i + 1 == samples ? x_max : a_hat + (x_max - a_hat) * i / (samples - 1);
    const double r = an * std::pow(xi, -n);  // (a/x)^n
    x[i] = xi;
    phi[i] = i == 0 ? 0.0 : kn * xi * (1 - r);
    dphi[i] = kn * (1 + (n - 1) * r);
  }
  return MomentProfile(std::move(x), std::move(phi), std::move(dphi), a_hat, x_max);
}

Window default_window(const RescaledProfile& r) {
  const double a_hat = to_double(r.profile.cls.a);
  const double b_hat = to_double(r.profile.cls.b);
  return {a_hat + 0.1, std::min(10.0, 0.5 * b_hat)};
}

BlowupReport blowup_report(const std::vector<IndexedProfile>& checkpoints,
                           const FlowParams& params, const BlowupOptions& opts) {
  if (checkpoints.size() < 3) throw std::invalid_argument("need >= 3 checkpoints");
  const SingularTimeInfo info = singular_time(params);
  if (info.regime != Regime::Contract)
    throw std::invalid_argument("blow-up analysis requires the Contract regime, got " +
                                to_string(info.regime));
  std::map<int, RescaledProfile> rescaled;
  for (const auto& cp : checkpoints) {
    if (!(cp.profile.t < info.T)) throw std::invalid_argument("checkpoint at or after T");
    rescaled.emplace(cp.j, rescale(cp.profile, 1.0 / (info.T - cp.profile.t)));
  }
  BlowupReport rep;
  rep.n = params.n;
  rep.k = params.k;
  rep.T = info.T;
  rep.lambda = opts.lambda;
  const double a_ref = params.n - params.k;
  for (const auto& [j, r] : rescaled) {
    if (j < opts.first_j) continue;
    auto prev = rescaled.find(j - 1);
    if (prev == rescaled.end()) continue;
    BlowupRow row;
    row.j = j;
    row.t = r.t;
    row.K = r.K;
    row.a_hat = to_double(r.profile.cls.a);
    row.window = default_window(r);
    const Window wp = default_window(prev->second);
    const Window common{std::max(row.window.lo, wp.lo), std::min(row.window.hi, wp.hi)};
    row.selfsim_prev = self_similarity_distance(r, prev->second, common, opts.samples);
    const SolitonFit fit = soliton_residual(r.moment, params.n, opts.lambda, row.window);
    row.soliton_rms = fit.residual_rms;
    row.mu = fit.mu;
    row.c = fit.c;
    const MomentProfile fik = fik_reference(params.n, params.k, a_ref, row.window.hi + 1.0, 4001);
    row.fik_dist = self_similarity_distance(r.moment, fik, row.window, opts.samples);
    row.rm_left = curvature_norm_proxy(r.profile, params.n).front();
    rep.rows.push_back(row);
  }
  return rep;
}

std::string blowup_csv(const BlowupReport& r) {
  std::ostringstream os;
  os << "j,t_j,K_j,a_hat,selfsim_prev,soliton_rms,fik_dist\n";
  char buf[256];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.j, row.t, row.K,
                  row.a_hat, row.selfsim_prev, row.soliton_rms, row.fik_dist);
    os << buf;
  }
  return os.str();
}

void write_blowup_csv(const BlowupReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << blowup_csv(r);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

std::string blowup_json(const BlowupReport& r) {
  using nlohmann::json;
  json j;
  j["n"] = r.n;
  j["k"] = r.k;
  j["T"] = r.T;
  j["lambda"] = r.lambda;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"j", row.j},
                    {"t", row.t},
                    {"K", row.K},
                    {"mu", row.mu},
                    {"c", row.c},
                    {"soliton_rms", row.soliton_rms},
                    {"fik_dist", row.fik_dist},
                    {"window", {row.window.lo, row.window.hi}},
                    {"rm_left", row.rm_left}});
  j["fits"] = rows;
  return j.dump(2);
}

}  // namespace calabi
