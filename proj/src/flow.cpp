#include "calabi/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace calabi {

void StepControl::validate() const {
  if (!(dt_min > 0) || !(dt_min <= dt_max) || !(dt_init > 0))
    throw std::invalid_argument("StepControl: need 0 < dt_min <= dt_max and dt_init > 0");
  if (!(t_stop_fraction > 0 && t_stop_fraction < 1))
    throw std::invalid_argument("StepControl: t_stop_fraction must lie in (0,1)");
  if (!(tol_step > 0) || !(tol_newton > 0))
    throw std::invalid_argument("StepControl: tolerances must be positive");
  if (max_newton < 1) throw std::invalid_argument("StepControl: max_newton must be >= 1");
}

Real compute_ct(const CalabiProfile& p, int n, CtVariant variant) {
  const int c = p.grid.center();
  const Real log_u2 = qlog(p.d2u[c]);
  if (variant == CtVariant::Literal) return -log_u2 - (n - 1) * p.du[c];
  return -log_u2 - (n - 1) * qlog(p.du[c]);
}

std::vector<double> rhs(const CalabiProfile& p, int n, Real ct, double floor_u2) {
  const int N = p.size();
  std::vector<double> out(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    if (!(p.d2u[i] > Real(floor_u2)) || !(p.du[i] > 0)) throw DegenerateProfile("profile degenerate");
    out[i] = to_double(qlog(p.d2u[i]) + (n - 1) * qlog(p.du[i]) - n * p.grid.node(i) + ct);
  }
  return out;
}

FlowState initial_state(const FlowParams& params, const RhoGrid& grid, CtVariant variant) {
  params.validate();
  FlowState s;
  s.params = params;
  s.ct_variant = variant;
  s.profile = build_canonical_profile(class_at(params, 0.0), grid, params.k);
  s.ct = to_double(compute_ct(s.profile, params.n, variant));
  return s;
}

FlowState state_from_profile(const FlowParams& params, CalabiProfile p, CtVariant variant) {
  params.validate();
  if (p.twist != params.k) throw std::invalid_argument("profile twist does not match params.k");
  const KahlerClass expect = class_at(params, p.t);
  auto rel = [](Real x, Real y) { return to_double(qabs(x - y) / qmax(qabs(y), Real(1e-300))); };
  if (rel(p.cls.a, expect.a) > 1e-9 || rel(p.cls.b, expect.b) > 1e-9)
    throw std::invalid_argument("profile class does not match class_at(params, t)");
  FlowState s;
  s.params = params;
  s.ct_variant = variant;
  s.profile = std::move(p);
  s.ct = to_double(compute_ct(s.profile, params.n, variant));
  return s;
}

namespace {

// Ghost node from the tail model w = c + alpha z + beta z^2, z = e^{k rho}
// (left) or e^{-k rho} (right), through the three outermost nodes: Lagrange
// weights in z. The same model backs the diagnostic derivatives.
struct Closure {
  Real a, b;
  Real g[3];  // weights of the nodes at 0, 1, 2 steps inward
};

Closure make_closure(const KahlerClass& cls, Real q) {
  const Real z[3] = {1, q, q * q};
  const Real zg = 1 / q;
  Closure c{cls.a, cls.b, {}};
  for (int s = 0; s < 3; ++s) {
    Real w = 1;
    for (int r = 0; r < 3; ++r)
      if (r != s) w *= (zg - z[r]) / (z[s] - z[r]);
    c.g[s] = w;
  }
  return c;
}

Real left_ghost(const RealVector& w, const RhoGrid& g, const Closure& c) {
  Real v = c.a * (g.node(0) - g.spacing());
  for (int s = 0; s < 3; ++s) v += c.g[s] * (w[s] - c.a * g.node(s));
  return v;
}

Real right_ghost(const RealVector& w, const RhoGrid& g, const Closure& c) {
  const int N = g.size();
  Real v = c.b * (g.node(N - 1) + g.spacing());
  for (int s = 0; s < 3; ++s) v += c.g[s] * (w[N - 1 - s] - c.b * g.node(N - 1 - s));
  return v;
}

struct Stencil2 {
  RealVector d1, d2;
};

// 3-point first and second differences with closure ghosts.
Stencil2 second_order(const RealVector& w, const RhoGrid& g, const Closure& c) {
  const int N = g.size();
  const Real h = g.spacing();
  const Real gl = left_ghost(w, g, c);
  const Real gr = right_ghost(w, g, c);
  Stencil2 s;
  s.d1.resize(w.size());
  s.d2.resize(w.size());
  for (int i = 0; i < N; ++i) {
    const Real wm = i == 0 ? gl : w[i - 1];
    const Real wp = i == N - 1 ? gr : w[i + 1];
    s.d1[i] = (wp - wm) / (2 * h);
    s.d2[i] = (wp - 2 * w[i] + wm) / (h * h);
  }
  return s;
}

bool positive(const Stencil2& s) {
  for (std::size_t i = 0; i < s.d1.size(); ++i)
    if (!(s.d1[i] > 0) || !(s.d2[i] > 0)) return false;
  return true;
}

// F without c_t: log u'' + (n-1) log u' - n rho.
RealVector reduced_rhs(const Stencil2& s, const RhoGrid& g, int n) {
  RealVector f(s.d1.size());
  for (int i = 0; i < g.size(); ++i)
    f[i] = qlog(s.d2[i]) + (n - 1) * qlog(s.d1[i]) - n * g.node(i);
  return f;
}

// Solves a tridiagonal system in place (Thomas); sub[0] and sup[N-1] unused.
void solve_tridiagonal(RealVector& sub, RealVector& diag, RealVector& sup, RealVector& rhs) {
  const std::size_t N = diag.size();
  for (std::size_t i = 1; i < N; ++i) {
    const Real m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[N - 1] /= diag[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct SolveResult {
  RealVector u;
  int iters = 0;
  Real residual = 0;
};

// Backward Euler for the c_t-free operator. Adding a spatial constant does
// not change F, so the solution with c_t is w + dt * c_t(w) exactly.
SolveResult backward_euler(const CalabiProfile& prev, const FlowParams& params, double dt,
                           const StepControl& ctl, CtVariant variant) {
  const RhoGrid& g = prev.grid;
  const int N = g.size();
  const int n = params.n;
  const Real h = g.spacing();
  const Real q = qexp(Real(params.k) * h);
  const Real tau = dt;
  const Closure old_closure = make_closure(prev.cls, q);
  const KahlerClass next = class_at(params, prev.t + dt);
  const Closure closure = make_closure(next, q);

  // Explicit predictor; carries the class drift of the tails.
  RealVector w(prev.u);
  {
    const Stencil2 s0 = second_order(prev.u, g, old_closure);
    if (!positive(s0)) throw DegenerateProfile("profile degenerate");
    const RealVector f0 = reduced_rhs(s0, g, n);
    const Real shift = f0[g.center()];
    for (int i = 0; i < N; ++i) w[i] += tau * (f0[i] - shift);
  }

  RealVector sub(N), diag(N), sup(N), r(N);
  SolveResult out;
  Stencil2 s = second_order(w, g, closure);
  if (!positive(s)) {
    w = prev.u;
    s = second_order(w, g, closure);
    if (!positive(s)) throw StepFailure("step failure: predictor left the admissible set");
  }
  const Real tol = ctl.tol_newton;
  for (int it = 1; it <= ctl.max_newton; ++it) {
    const RealVector f = reduced_rhs(s, g, n);
    Real res_norm = 0;
    for (int i = 0; i < N; ++i) {
      r[i] = -(w[i] - prev.u[i] - tau * f[i]);
      res_norm = qmax(res_norm, qabs(r[i]));
    }
    for (int i = 0; i < N; ++i) {
      const Real c2 = 1 / (s.d2[i] * h * h);
      const Real c1 = Real(n - 1) / (s.d1[i] * 2 * h);
      sub[i] = -tau * (c2 - c1);
      diag[i] = 1 + tau * 2 * c2;
      sup[i] = -tau * (c2 + c1);
    }
    // Ghosts depend on three nodes; the third entry of the first and last
    // rows is eliminated against the neighbouring row.
    const Real* gw = closure.g;
    diag[0] += sub[0] * gw[0];
    sup[0] += sub[0] * gw[1];
    Real extra = sub[0] * gw[2];
    {
      const Real f = extra / sup[1];
      diag[0] -= f * sub[1];
      sup[0] -= f * diag[1];
      r[0] -= f * r[1];
    }
    diag[N - 1] += sup[N - 1] * gw[0];
    sub[N - 1] += sup[N - 1] * gw[1];
    extra = sup[N - 1] * gw[2];
    {
      const Real f = extra / sub[N - 2];
      diag[N - 1] -= f * sup[N - 2];
      sub[N - 1] -= f * diag[N - 2];
      r[N - 1] -= f * r[N - 2];
    }
    solve_tridiagonal(sub, diag, sup, r);

    Real step_norm = 0;
    for (int i = 0; i < N; ++i) step_norm = qmax(step_norm, qabs(r[i]));

    // Damp until the iterate stays admissible.
    Real lambda = 1;
    RealVector trial(w);
    Stencil2 st;
    for (int halvings = 0;; ++halvings) {
      for (int i = 0; i < N; ++i) trial[i] = w[i] + lambda * r[i];
      st = second_order(trial, g, closure);
      if (positive(st)) break;
      if (halvings == 40) throw StepFailure("step failure: Newton update not admissible");
      lambda /= 2;
    }
    w.swap(trial);
    s = std::move(st);
    out.iters = it;
    out.residual = res_norm;
    if (lambda == 1 && step_norm <= tol * (1 + qabs(w[g.center()]))) {
      const int c = g.center();
      const Real ct = variant == CtVariant::Literal
                          ? -qlog(s.d2[c]) - (n - 1) * s.d1[c]
                          : -qlog(s.d2[c]) - (n - 1) * qlog(s.d1[c]);
      for (auto& v : w) v += tau * ct;
      out.u = std::move(w);
      return out;
    }
  }
  throw StepFailure("step failure: Newton did not converge");
}

FlowState finish(const FlowState& from, SolveResult&& sr, double dt, const StepControl& ctl) {
  FlowState s;
  s.params = from.params;
  s.ct_variant = from.ct_variant;
  const double t = from.profile.t + dt;
  const KahlerClass cls = class_at(from.params, t);
  s.profile = make_profile(from.profile.grid, std::move(sr.u), cls, t, from.params.k);
  const Real floor = Real(ctl.floor_u2) * (cls.b - cls.a);
  for (int i = 0; i < s.profile.size(); ++i) {
    if (!(s.profile.d2u[i] > floor) || (i > 0 && !(s.profile.du[i] > s.profile.du[i - 1])))
      throw DegenerateProfile("profile degenerate");
  }
  s.ct = to_double(compute_ct(s.profile, from.params.n, from.ct_variant));
  s.step_stats.dt = dt;
  s.step_stats.newton_iters = sr.iters;
  s.step_stats.residual = to_double(sr.residual);
  return s;
}

}  // namespace

FlowState advance(const FlowState& state, double dt, const StepControl& ctl) {
  if (!(dt > 0)) throw std::invalid_argument("advance: dt must be positive");
  SolveResult sr = backward_euler(state.profile, state.params, dt, ctl, state.ct_variant);
  return finish(state, std::move(sr), dt, ctl);
}

FlowState step(const FlowState& state, const StepControl& ctl, double dt_cap) {
  double dt = state.step_stats.dt_next > 0 ? state.step_stats.dt_next : ctl.dt_init;
  dt = std::min({dt, ctl.dt_max, dt_cap});
  int rejected = 0;
  while (true) {
    if (dt < ctl.dt_min && dt < dt_cap) throw StepFailure("step failure");
    try {
      SolveResult full = backward_euler(state.profile, state.params, dt, ctl, state.ct_variant);
      FlowState half = advance(state, dt / 2, ctl);
      SolveResult second = backward_euler(half.profile, state.params, dt / 2, ctl, state.ct_variant);
      Real err = 0;
      for (std::size_t i = 0; i < full.u.size(); ++i)
        err = qmax(err, qabs(second.u[i] - full.u[i]));
      const double e = to_double(err);
      if (e > ctl.tol_step) {
        dt *= std::max(0.2, 0.9 * std::sqrt(ctl.tol_step / e));
        ++rejected;
        continue;
      }
      const int iters = full.iters + half.step_stats.newton_iters + second.iters;
      FlowState next = finish(half, std::move(second), dt / 2, ctl);
      next.step_stats.dt = dt;
      next.step_stats.newton_iters = iters;
      next.step_stats.rejected = rejected;
      const double grow = e > 0 ? 0.9 * std::sqrt(ctl.tol_step / e) : 2.0;
      next.step_stats.dt_next = std::clamp(dt * std::min(2.0, grow), ctl.dt_min, ctl.dt_max);
      return next;
    } catch (const StepFailure&) {
      dt /= 2;
      ++rejected;
    } catch (const DegenerateProfile&) {
      // A smaller step may stay admissible; give up only at dt_min.
      if (dt / 2 < ctl.dt_min) throw;
      dt /= 2;
      ++rejected;
    }
  }
}

EvolutionRhs evolution_rhs(const CalabiProfile& p, int n) {
  const std::size_t N = p.du.size();
  const Real k = p.twist;
  const RealVector d5u = differentiate_tail_array(p.d4u, p.grid, k, k);
  EvolutionRhs out;
  out.du.resize(N);
  out.d2u.resize(N);
  out.d3u.resize(N);
  const Real m = n - 1;
  for (std::size_t i = 0; i < N; ++i) {
    const Real u1 = p.du[i], u2 = p.d2u[i], u3 = p.d3u[i], u4 = p.d4u[i], u5 = d5u[i];
    out.du[i] = to_double(u3 / u2 + m * u2 / u1 - n);
    out.d2u[i] = to_double(u4 / u2 - u3 * u3 / (u2 * u2) + m * u3 / u1 - m * u2 * u2 / (u1 * u1));
    out.d3u[i] = to_double(u5 / u2 - 3 * u3 * u4 / (u2 * u2) + 2 * u3 * u3 * u3 / (u2 * u2 * u2) +
                           m * u4 / u1 - 3 * m * u2 * u3 / (u1 * u1) +
                           2 * m * u2 * u2 * u2 / (u1 * u1 * u1));
  }
  return out;
}

EvolutionRhs evolution_residuals(const CalabiProfile& prev, const CalabiProfile& next, double dt,
                                 int n) {
  if (!(dt > 0)) throw std::invalid_argument("evolution_residuals: dt must be positive");
  EvolutionRhs r = evolution_rhs(next, n);
  const Real tau = dt;
  for (std::size_t i = 0; i < r.du.size(); ++i) {
    r.du[i] = to_double((next.du[i] - prev.du[i]) / tau) - r.du[i];
    r.d2u[i] = to_double((next.d2u[i] - prev.d2u[i]) / tau) - r.d2u[i];
    r.d3u[i] = to_double((next.d3u[i] - prev.d3u[i]) / tau) - r.d3u[i];
  }
  return r;
}

}  // namespace calabi
