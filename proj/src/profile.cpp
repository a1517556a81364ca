#include "calabi/profile.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace calabi {

void FlowParams::validate() const {
  if (n < 2) throw std::invalid_argument("FlowParams: n must be >= 2");
  if (k < 1) throw std::invalid_argument("FlowParams: k must be >= 1");
  if (!(a0 > 0) || !(a0 < b0))
    throw std::invalid_argument("FlowParams: need 0 < a0 < b0");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Contract: return "Contract";
    case Regime::Collapse: return "Collapse";
    case Regime::Shrink: return "Shrink";
  }
  return "?";
}

Regime parse_regime(const std::string& s) {
  if (s == "Contract" || s == "contract") return Regime::Contract;
  if (s == "Collapse" || s == "collapse") return Regime::Collapse;
  if (s == "Shrink" || s == "shrink") return Regime::Shrink;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

RhoGrid::RhoGrid(double half_width, int nodes) : half_width_(half_width), nodes_(nodes) {
  if (!(half_width > 0)) throw std::invalid_argument("RhoGrid: L must be positive");
  if (nodes < kMinNodes) throw std::invalid_argument("RhoGrid: N must be >= 257");
  if (nodes % 2 == 0) throw std::invalid_argument("RhoGrid: N must be odd");
  spacing_ = 2 * Real(half_width) / (nodes - 1);
}

RealVector RhoGrid::nodes() const {
  RealVector r(static_cast<std::size_t>(nodes_));
  for (int i = 0; i < nodes_; ++i) r[i] = node(i);
  return r;
}

KahlerClass class_at(const FlowParams& params, double t) {
  const SingularTimeInfo info = singular_time(params);
  if (!(t < info.T)) throw std::domain_error("class left Kahler cone");
  const Real tt = t;
  return {Real(params.a0) - (params.n - params.k) * tt, Real(params.b0) - (params.n + params.k) * tt};
}

SingularTimeInfo singular_time(const FlowParams& params) {
  params.validate();
  SingularTimeInfo info;
  // k >= n never contracts D_0: a_t grows or stays put.
  info.Ta = params.k < params.n ? params.a0 / (params.n - params.k)
                                : std::numeric_limits<double>::infinity();
  // b_t - a_t = (b0 - a0) - 2k t
  info.Tb = (params.b0 - params.a0) / (2.0 * params.k);
  info.T = std::min(info.Ta, info.Tb);
  // Exact comparison in the parameters avoids a rounding tie-break:
  // Ta == Tb  <=>  2k a0 == (n-k)(b0 - a0).
  const double lhs = 2.0 * params.k * params.a0;
  const double rhs = (params.n - params.k) * (params.b0 - params.a0);
  if (params.k < params.n && lhs == rhs)
    info.regime = Regime::Shrink;
  else
    info.regime = info.Ta < info.Tb ? Regime::Contract : Regime::Collapse;
  return info;
}

CalabiProfile build_canonical_profile(const KahlerClass& cls, const RhoGrid& grid, int twist) {
  if (!cls.in_cone()) throw std::invalid_argument("build_canonical_profile: class outside cone");
  if (twist < 1) throw std::invalid_argument("build_canonical_profile: twist must be >= 1");
  CalabiProfile p;
  p.grid = grid;
  p.cls = cls;
  p.twist = twist;
  const std::size_t N = static_cast<std::size_t>(grid.size());
  p.u.resize(N);
  p.du.resize(N);
  p.d2u.resize(N);
  p.d3u.resize(N);
  p.d4u.resize(N);
  const Real k = twist;
  const Real w = cls.b - cls.a;
  for (std::size_t i = 0; i < N; ++i) {
    const Real r = grid.node(static_cast<int>(i));
    const Real s = qlogistic(k * r);
    const Real q = s * (1 - s);
    p.u[i] = cls.a * r + w / k * qsoftplus(k * r);
    p.du[i] = cls.a + w * s;
    p.d2u[i] = k * w * q;
    p.d3u[i] = k * k * w * q * (1 - 2 * s);
    p.d4u[i] = k * k * k * w * q * (1 - 6 * s + 6 * s * s);
  }
  return p;
}

namespace {

constexpr int kGhosts = 3;

// Tail model w = c + alpha E + beta E^2 with E = e^{k rho} (left) or
// e^{-k rho} (right), w = u - a rho or u - b rho, fitted exactly to the
// three outermost nodes. Both closures u'' = k(u' - a) and u'' = k(b - u')
// hold up to the beta term, which is O(u''^2).
struct TailFit {
  Real c, alpha, beta;
  Real at(Real q, int s) const { return c + alpha * qpow(q, s) + beta * qpow(q, 2 * s); }
};

TailFit fit_tail(Real w0, Real w1, Real w2, Real q) {
  const Real d1 = w1 - w0;
  const Real d2 = w2 - w1;
  TailFit f;
  f.beta = (d2 - q * d1) / ((q * q - 1) * (q * q - q));
  f.alpha = (d1 - f.beta * (q * q - 1)) / (q - 1);
  f.c = w0 - f.alpha - f.beta;
  return f;
}

// Extends u by three ghost values per side; index shift kGhosts.
RealVector extend_with_tails(const RealVector& u, const RhoGrid& grid, const KahlerClass& cls,
                             Real k) {
  const int N = grid.size();
  const Real h = grid.spacing();
  const Real q = qexp(k * h);
  RealVector e(static_cast<std::size_t>(N + 2 * kGhosts));
  for (int i = 0; i < N; ++i) e[i + kGhosts] = u[i];

  auto wl = [&](int i) { return u[i] - cls.a * grid.node(i); };
  auto wr = [&](int i) { return u[i] - cls.b * grid.node(i); };
  const TailFit left = fit_tail(wl(0), wl(1), wl(2), q);
  const TailFit right = fit_tail(wr(N - 1), wr(N - 2), wr(N - 3), q);
  for (int m = 1; m <= kGhosts; ++m) {
    const Real rl = grid.node(0) - m * h;
    const Real rr = grid.node(N - 1) + m * h;
    e[kGhosts - m] = cls.a * rl + left.at(q, -m);
    e[kGhosts + N - 1 + m] = cls.b * rr + right.at(q, -m);
  }
  return e;
}

Real stencil_d1(const Real* f, Real h) {
  return (f[-2] - 8 * f[-1] + 8 * f[1] - f[2]) / (12 * h);
}
Real stencil_d2(const Real* f, Real h) {
  return (-f[-2] + 16 * f[-1] - 30 * f[0] + 16 * f[1] - f[2]) / (12 * h * h);
}
Real stencil_d3(const Real* f, Real h) {
  return (f[-3] - 8 * f[-2] + 13 * f[-1] - 13 * f[1] + 8 * f[2] - f[3]) / (8 * h * h * h);
}
Real stencil_d4(const Real* f, Real h) {
  return (-f[-3] + 12 * f[-2] - 39 * f[-1] + 56 * f[0] - 39 * f[1] + 12 * f[2] - f[3]) /
         (6 * h * h * h * h);
}

}  // namespace

Derivatives differentiate(const RealVector& u, const RhoGrid& grid, const KahlerClass& cls,
                          int twist) {
  const int N = grid.size();
  if (static_cast<int>(u.size()) != N)
    throw std::invalid_argument("differentiate: array length does not match grid");
  const RealVector e = extend_with_tails(u, grid, cls, Real(twist));
  const Real h = grid.spacing();
  Derivatives d;
  d.du.resize(u.size());
  d.d2u.resize(u.size());
  d.d3u.resize(u.size());
  d.d4u.resize(u.size());
  for (int i = 0; i < N; ++i) {
    const Real* f = e.data() + i + kGhosts;
    d.du[i] = stencil_d1(f, h);
    d.d2u[i] = stencil_d2(f, h);
    d.d3u[i] = stencil_d3(f, h);
    d.d4u[i] = stencil_d4(f, h);
  }
  return d;
}

RealVector differentiate_tail_array(const RealVector& f, const RhoGrid& grid, Real rate_left,
                                    Real rate_right) {
  const int N = grid.size();
  if (static_cast<int>(f.size()) != N)
    throw std::invalid_argument("differentiate_tail_array: length mismatch");
  const Real h = grid.spacing();
  RealVector e(static_cast<std::size_t>(N + 2 * kGhosts));
  for (int i = 0; i < N; ++i) e[i + kGhosts] = f[i];
  for (int m = 1; m <= kGhosts; ++m) {
    e[kGhosts - m] = f[0] * qexp(-rate_left * m * h);
    e[kGhosts + N - 1 + m] = f[N - 1] * qexp(-rate_right * m * h);
  }
  RealVector out(f.size());
  for (int i = 0; i < N; ++i) out[i] = stencil_d1(e.data() + i + kGhosts, h);
  return out;
}

CalabiProfile make_profile(const RhoGrid& grid, RealVector u, const KahlerClass& cls, double t,
                           int twist) {
  Derivatives d = differentiate(u, grid, cls, twist);
  CalabiProfile p;
  p.grid = grid;
  p.u = std::move(u);
  p.du = std::move(d.du);
  p.d2u = std::move(d.d2u);
  p.d3u = std::move(d.d3u);
  p.d4u = std::move(d.d4u);
  p.cls = cls;
  p.t = t;
  p.twist = twist;
  return p;
}

bool ValidationReport::mentions(const std::string& invariant) const {
  for (const auto& v : violations)
    if (v.invariant == invariant) return true;
  return false;
}

std::string ValidationReport::summary() const {
  if (ok()) return "admissible";
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(violations.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& v = violations[i];
    os << v.invariant << " at node " << v.node << " (value " << v.value << ")\n";
  }
  if (violations.size() > shown) os << "... " << violations.size() - shown << " more\n";
  return os.str();
}

ValidationReport validate_profile(const CalabiProfile& p, double tol) {
  ValidationReport rep;
  const int N = p.size();
  auto check_len = [&](const RealVector& v, const char* name) {
    if (static_cast<int>(v.size()) != N)
      throw std::invalid_argument(std::string("validate_profile: wrong length for ") + name);
  };
  check_len(p.u, "u");
  check_len(p.du, "du");
  check_len(p.d2u, "d2u");
  check_len(p.d3u, "d3u");
  check_len(p.d4u, "d4u");

  for (int i = 0; i < N; ++i) {
    if (!(p.d2u[i] > 0)) rep.violations.push_back({"u''>0", i, to_double(p.d2u[i])});
    if (!(p.du[i] > p.cls.a) || !(p.du[i] < p.cls.b))
      rep.violations.push_back({"a<u'<b", i, to_double(p.du[i])});
    if (i > 0 && !(p.du[i] > p.du[i - 1]))
      rep.violations.push_back({"u' increasing", i, to_double(p.du[i] - p.du[i - 1])});
  }
  const Real k = p.twist;
  const Real left = qabs(p.d2u[0] - k * (p.du[0] - p.cls.a));
  if (!(left <= Real(tol) * p.cls.a))
    rep.violations.push_back({"closure at -L", 0, to_double(left)});
  const Real right = qabs(p.d2u[N - 1] - k * (p.cls.b - p.du[N - 1]));
  if (!(right <= Real(tol) * p.cls.b))
    rep.violations.push_back({"closure at +L", N - 1, to_double(right)});
  return rep;
}

}  // namespace calabi
