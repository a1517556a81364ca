#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "calabi/curvature.hpp"
#include "calabi/flow.hpp"

namespace calabi {

/// Which monitors are evaluated, and every how many accepted steps.
/// Disabled monitors are written as NaN.
struct MonitorSet {
  int cadence = 1;
  bool curvature = true;  ///< supRm, typeI, bisectional, c4, sigma ratios
  bool divisor = true;    ///< lambda_div_scaled (Contract regime only)
  bool lemma = true;      ///< H_sup, G_sup, G_inf
  bool volume = true;
  bool diameter = true;

  void validate() const;
  static MonitorSet all() { return {}; }
  static MonitorSet none();
};

struct TraceRow {
  double t = 0, a = 0, b = 0;
  double supRm, typeI, H_sup, G_sup, G_inf;
  double bisec_min, bisec_min_scaled, c4_min_scaled, lambda_div_scaled;
  std::vector<double> sigma;  ///< sigma_bound_ratio for k = 2..n
  double vol_quad, vol_class, vol_ratio, diam;
  double dt = 0;
  int iters = 0;
};

struct FlowTrace {
  int n = 2;
  double T = 0;
  Regime regime = Regime::Contract;  ///< algebraic prediction
  std::vector<TraceRow> rows;
  std::vector<std::size_t> checkpoint_rows;  ///< row index of each checkpoint, j = 1, 2, ..
};

/// (T - t) max curvature_norm_proxy. Throws std::domain_error if t >= T.
double type_one_ratio(const FlowState& state, double T);
double type_one_ratio(const std::vector<double>& proxy, double t, double T);

/// (T - t) lambda2 at rho = -L. NaN outside the Contract regime.
double divisor_eigenvalue_scaled(const FlowState& state, double T);

/// (T - t) min over interior nodes of -u''''/(u'')^2 + (u''')^2/(u'')^3.
double c4_min_scaled(const FlowState& state, double T);

/// Minimum of all normalized bisectional components; scaled by (T - t).
double bisectional_min(const FlowState& state);
double bisectional_min_scaled(const FlowState& state, double T);

/// max_i |sigma_k| (T-t)^{k-1} / max(rmProxy, 1e-30). Throws
/// std::out_of_range unless 2 <= k <= n.
double sigma_bound_ratio(const FlowState& state, double T, int k);

struct Volume {
  double quad = 0;
  double cls = 0;
};

/// int (u')^{n-1} u'' drho with the trapezoid rule and exact tail
/// corrections, against (b^n - a^n)/n. The sphere constant is dropped.
Volume total_volume(const CalabiProfile& p, int n);
Volume total_volume(const FlowState& state);

/// sup H and sup/inf G for H = u''/u', G = u'''/u''.
struct LemmaBounds {
  double H_sup, G_sup, G_inf;
};
LemmaBounds lemma_bounds(const CalabiProfile& p);

/// Diameter of the reference Fubini-Study slice, ds^2 = 2 Re g.
double alpha_n(int n);
/// alpha_n sqrt(a_t).
double divisor_diameter(const FlowState& state);

/// Classifies the trend of vol_ratio = vol_quad/(T-t) near T from the
/// log-log slope s against (T - t) over rows with t >= 0.9 T:
/// s < -1/2 Contract, |s| <= 1/2 Collapse, s > 1/2 Shrink. Throws
/// std::invalid_argument unless the trace reaches 0.99 T with volume data.
Regime regime_indicator(const FlowTrace& trace);

/// Evaluates the enabled monitors on one state.
TraceRow sample_row(const FlowState& state, const SingularTimeInfo& info,
                    const MonitorSet& monitors);

std::vector<std::string> trace_header(int n);
void write_trace_csv(const FlowTrace& trace, std::ostream& os);
void write_trace_csv(const FlowTrace& trace, const std::string& path);
/// Reads a trace CSV; n is inferred from the sigma columns.
FlowTrace parse_trace_csv(std::istream& is);
FlowTrace read_trace_csv(const std::string& path);

void write_summary_json(const FlowTrace& trace, const std::string& path);
std::string summary_json(const FlowTrace& trace);

}  // namespace calabi
