#pragma once

#include <stdexcept>
#include <vector>

#include "calabi/profile.hpp"

namespace calabi {

class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateProfile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How c_t is formed from the profile at rho = 0.
///   Log:     c_t = -log u''(0) - (n-1) log u'(0)   (makes u_t(0) = 0)
///   Literal: c_t = -log u''(0) - (n-1) u'(0)
/// c_t only shifts u by a spatial constant, so the geometry is the same
/// under both.
enum class CtVariant { Log, Literal };

struct StepStats {
  double dt = 0;
  int newton_iters = 0;
  double residual = 0;
  double dt_next = 0;
  int rejected = 0;
};

struct StepControl {
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1e-2;
  double tol_newton = 1e-22;
  double tol_step = 1e-6;
  double t_stop_fraction = 0.999;
  /// Degeneracy floor on min u'', relative to the class width b_t - a_t.
  double floor_u2 = 1e-10;
  int max_newton = 30;

  void validate() const;
};

struct FlowState {
  CalabiProfile profile;
  FlowParams params;
  double ct = 0;
  CtVariant ct_variant = CtVariant::Log;
  StepStats step_stats;

  double t() const { return profile.t; }
};

Real compute_ct(const CalabiProfile& p, int n, CtVariant variant = CtVariant::Log);

/// log u'' + (n-1) log u' - n rho + ct from the stored derivatives. Boundary
/// rows use the closure-backed derivatives at rho = -+L. Throws
/// DegenerateProfile("profile degenerate") if u'' <= floor anywhere.
std::vector<double> rhs(const CalabiProfile& p, int n, Real ct, double floor_u2 = 0.0);

/// Canonical seed in the initial class.
FlowState initial_state(const FlowParams& params, const RhoGrid& grid,
                        CtVariant variant = CtVariant::Log);

/// Wraps a loaded profile. Throws std::invalid_argument if its class does not
/// match class_at(params, p.t) to 1e-9 relative.
FlowState state_from_profile(const FlowParams& params, CalabiProfile p,
                             CtVariant variant = CtVariant::Log);

/// One backward-Euler step of fixed size dt: Newton on a tridiagonal
/// Jacobian built from 3-point stencils, ghost nodes from the tail closure
/// in the new class. Throws StepFailure on Newton non-convergence and
/// DegenerateProfile if the result is not admissible.
FlowState advance(const FlowState& state, double dt, const StepControl& ctl);

/// Adaptive step: tries dt = min(state.step_stats.dt_next or ctl.dt_init,
/// dt_cap), estimates the local error by step doubling and retries with a
/// smaller dt until it is below tol_step. Throws StepFailure("step failure")
/// below dt_min.
FlowState step(const FlowState& state, const StepControl& ctl, double dt_cap);

struct EvolutionRhs {
  std::vector<double> du, d2u, d3u;
};

/// Right-hand sides of the evolution of u', u'', u''' at p. u^(5) comes from
/// one more differentiation of the stored u''''.
EvolutionRhs evolution_rhs(const CalabiProfile& p, int n);

/// (q_next - q_prev)/dt - rhs(next) for q = u', u'', u'''.
EvolutionRhs evolution_residuals(const CalabiProfile& prev, const CalabiProfile& next, double dt,
                                 int n);

}  // namespace calabi
