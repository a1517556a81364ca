#include "calabi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace calabi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double time_to_go(const FlowState& s, double T) {
  if (!(s.t() < T)) throw std::domain_error("monitor needs t < T");
  return T - s.t();
}

double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

double min_of(const std::vector<double>& v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return m;
}

}  // namespace

void MonitorSet::validate() const {
  if (cadence < 1) throw std::invalid_argument("MonitorSet: cadence must be >= 1");
}

MonitorSet MonitorSet::none() {
  MonitorSet m;
  m.curvature = m.divisor = m.lemma = m.volume = m.diameter = false;
  return m;
}

double type_one_ratio(const std::vector<double>& proxy, double t, double T) {
  if (!(t < T)) throw std::domain_error("monitor needs t < T");
  return (T - t) * max_of(proxy);
}

double type_one_ratio(const FlowState& state, double T) {
  const double tau = time_to_go(state, T);
  return tau * max_of(curvature_norm_proxy(state.profile, state.params.n));
}

double divisor_eigenvalue_scaled(const FlowState& state, double T) {
  if (singular_time(state.params).regime != Regime::Contract) return kNaN;
  const double tau = time_to_go(state, T);
  const CalabiProfile& p = state.profile;
  const int n = state.params.n;
  const Real x = p.du[0];
  const Real dv = n - (n - 1) * p.d2u[0] / x - p.d3u[0] / p.d2u[0];
  return tau * to_double(dv / x);
}

double c4_min_scaled(const FlowState& state, double T) {
  const double tau = time_to_go(state, T);
  const CalabiProfile& p = state.profile;
  Real m = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < p.size(); ++i) {
    const Real u2 = p.d2u[i], u3 = p.d3u[i];
    m = qmin(m, -p.d4u[i] / (u2 * u2) + u3 * u3 / (u2 * u2 * u2));
  }
  return tau * to_double(m);
}

double bisectional_min(const FlowState& state) {
  const BisectionalComponents b = bisectional_components(state.profile, state.params.n);
  double m = std::min({min_of(b.r1111), min_of(b.r11kk), min_of(b.rkkkk)});
  if (!b.rkkll.empty()) m = std::min(m, min_of(b.rkkll));
  return m;
}

double bisectional_min_scaled(const FlowState& state, double T) {
  return time_to_go(state, T) * bisectional_min(state);
}

namespace {

double sigma_ratio_from(const CurvatureSample& c, int n, int k, double tau) {
  if (k < 2 || k > n) throw std::out_of_range("sigma_bound_ratio: need 2 <= k <= n");
  const double scale = std::pow(tau, k - 1);
  double m = 0;
  for (std::size_t i = 0; i < c.rm_proxy.size(); ++i)
    m = std::max(m, std::abs(c.sigma[k][i]) * scale / std::max(c.rm_proxy[i], 1e-30));
  return m;
}

}  // namespace

double sigma_bound_ratio(const FlowState& state, double T, int k) {
  const int n = state.params.n;
  if (k < 2 || k > n) throw std::out_of_range("sigma_bound_ratio: need 2 <= k <= n");
  const double tau = time_to_go(state, T);
  return sigma_ratio_from(sample_curvature(state.profile, n), n, k, tau);
}

Volume total_volume(const CalabiProfile& p, int n) {
  const int N = p.size();
  const Real h = p.grid.spacing();
  Real s = 0;
  for (int i = 0; i < N; ++i) {
    const Real f = qpow(p.du[i], Real(n - 1)) * p.d2u[i];
    s += (i == 0 || i == N - 1) ? f / 2 : f;
  }
  s *= h;
  const Real a = p.cls.a, b = p.cls.b;
  auto pw = [n](Real x) { return qpow(x, Real(n)); };
  s += (pw(p.du[0]) - pw(a)) / n + (pw(b) - pw(p.du[N - 1])) / n;
  return {to_double(s), to_double((pw(b) - pw(a)) / n)};
}

Volume total_volume(const FlowState& state) { return total_volume(state.profile, state.params.n); }

LemmaBounds lemma_bounds(const CalabiProfile& p) {
  Real hs = -std::numeric_limits<double>::infinity();
  Real gs = hs, gi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.size(); ++i) {
    hs = qmax(hs, p.d2u[i] / p.du[i]);
    const Real g = p.d3u[i] / p.d2u[i];
    gs = qmax(gs, g);
    gi = qmin(gi, g);
  }
  return {to_double(hs), to_double(gs), to_double(gi)};
}

double alpha_n(int n) {
  if (n < 2) throw std::invalid_argument("alpha_n: n must be >= 2");
  // The slice is CP^{n-1} with potential log(1 + e^rho); its radial line
  // element is sqrt(u''/2) drho, independent of n.
  static const double value = [] {
    const double R = 80.0;
    const int M = 32000;
    const double h = 2 * R / M;
    double s = 0;
    for (int i = 0; i <= M; ++i) {
      const double r = -R + h * i;
      const double e = std::exp(-std::abs(r));
      const double u2 = e / ((1 + e) * (1 + e));
      const double f = std::sqrt(u2 / 2);
      s += (i == 0 || i == M) ? f / 2 : f;
    }
    return s * h;
  }();
  return value;
}

double divisor_diameter(const FlowState& state) {
  return alpha_n(state.params.n) * std::sqrt(to_double(state.profile.cls.a));
}

Regime regime_indicator(const FlowTrace& trace) {
  if (trace.rows.empty() || !(trace.rows.back().t >= 0.99 * trace.T))
    throw std::invalid_argument("regime_indicator: trace does not reach 0.99 T");
  std::vector<double> xs, ys;
  for (const auto& r : trace.rows) {
    if (r.t < 0.9 * trace.T || !(r.t < trace.T)) continue;
    if (!std::isfinite(r.vol_ratio) || !(r.vol_ratio > 0)) continue;
    xs.push_back(std::log(trace.T - r.t));
    ys.push_back(std::log(r.vol_ratio));
  }
  if (xs.size() < 3) throw std::invalid_argument("regime_indicator: insufficient volume samples");
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0)) throw std::invalid_argument("regime_indicator: degenerate time samples");
  const double slope = sxy / sxx;
  if (slope < -0.5) return Regime::Contract;
  if (slope > 0.5) return Regime::Shrink;
  return Regime::Collapse;
}

TraceRow sample_row(const FlowState& state, const SingularTimeInfo& info,
                    const MonitorSet& monitors) {
  const CalabiProfile& p = state.profile;
  const int n = state.params.n;
  TraceRow r;
  r.t = state.t();
  r.a = to_double(p.cls.a);
  r.b = to_double(p.cls.b);
  r.dt = state.step_stats.dt;
  r.iters = state.step_stats.newton_iters;
  r.supRm = r.typeI = r.H_sup = r.G_sup = r.G_inf = kNaN;
  r.bisec_min = r.bisec_min_scaled = r.c4_min_scaled = r.lambda_div_scaled = kNaN;
  r.vol_quad = r.vol_class = r.vol_ratio = r.diam = kNaN;
  r.sigma.assign(static_cast<std::size_t>(n - 1), kNaN);
  const double T = info.T;
  const double tau = T - r.t;

  if (monitors.curvature) {
    const CurvatureSample c = sample_curvature(p, n);
    r.supRm = max_of(c.rm_proxy);
    r.typeI = tau * r.supRm;
    r.bisec_min = bisectional_min(state);
    r.bisec_min_scaled = tau * r.bisec_min;
    r.c4_min_scaled = c4_min_scaled(state, T);
    for (int k = 2; k <= n; ++k) r.sigma[k - 2] = sigma_ratio_from(c, n, k, tau);
  }
  if (monitors.divisor) r.lambda_div_scaled = divisor_eigenvalue_scaled(state, T);
  if (monitors.lemma) {
    const LemmaBounds lb = lemma_bounds(p);
    r.H_sup = lb.H_sup;
    r.G_sup = lb.G_sup;
    r.G_inf = lb.G_inf;
  }
  if (monitors.volume) {
    const Volume v = total_volume(p, n);
    r.vol_quad = v.quad;
    r.vol_class = v.cls;
    r.vol_ratio = v.quad / tau;
  }
  if (monitors.diameter) r.diam = divisor_diameter(state);
  return r;
}

std::vector<std::string> trace_header(int n) {
  std::vector<std::string> h = {"t",       "a",          "b",
                                "supRm",   "typeI",      "H_sup",
                                "G_sup",   "G_inf",      "bisec_min",
                                "bisec_min_scaled",      "c4_min_scaled",
                                "lambda_div_scaled"};
  for (int k = 2; k <= n; ++k) h.push_back("sigma" + std::to_string(k));
  for (const char* s : {"vol_quad", "vol_class", "vol_ratio", "diam", "dt", "iters"})
    h.emplace_back(s);
  return h;
}

namespace {

void put(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_trace_csv(const FlowTrace& trace, std::ostream& os) {
  const auto header = trace_header(trace.n);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : trace.rows) {
    std::vector<double> v = {r.t,         r.a,           r.b,         r.supRm,
                             r.typeI,     r.H_sup,       r.G_sup,     r.G_inf,
                             r.bisec_min, r.bisec_min_scaled,         r.c4_min_scaled,
                             r.lambda_div_scaled};
    v.insert(v.end(), r.sigma.begin(), r.sigma.end());
    v.insert(v.end(), {r.vol_quad, r.vol_class, r.vol_ratio, r.diam, r.dt});
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ',';
      put(os, v[i]);
    }
    os << ',' << r.iters << '\n';
  }
}

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace_csv(trace, os);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

FlowTrace parse_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trace CSV: missing header");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  int sigma_cols = 0;
  for (const auto& c : cols)
    if (c.rfind("sigma", 0) == 0) ++sigma_cols;
  FlowTrace tr;
  tr.n = sigma_cols + 1;
  if (cols != trace_header(tr.n)) throw std::runtime_error("trace CSV: unexpected header");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      char* end = nullptr;
      const double x = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0')
        throw std::runtime_error("trace CSV: bad number on line " + std::to_string(lineno));
      v.push_back(x);
    }
    if (v.size() != cols.size())
      throw std::runtime_error("trace CSV: wrong column count on line " + std::to_string(lineno));
    TraceRow r;
    std::size_t i = 0;
    for (double* f : {&r.t, &r.a, &r.b, &r.supRm, &r.typeI, &r.H_sup, &r.G_sup, &r.G_inf,
                      &r.bisec_min, &r.bisec_min_scaled, &r.c4_min_scaled, &r.lambda_div_scaled})
      *f = v[i++];
    for (int k = 0; k < sigma_cols; ++k) r.sigma.push_back(v[i++]);
    for (double* f : {&r.vol_quad, &r.vol_class, &r.vol_ratio, &r.diam, &r.dt}) *f = v[i++];
    r.iters = static_cast<int>(v[i]);
    tr.rows.push_back(std::move(r));
  }
  return tr;
}

FlowTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return parse_trace_csv(is);
}

std::string summary_json(const FlowTrace& trace) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  double typeI_max = kNaN, H_max = kNaN, G_inf = kNaN, vol_err = kNaN;
  for (const auto& r : trace.rows) {
    if (std::isfinite(r.typeI)) typeI_max = std::isnan(typeI_max) ? r.typeI : std::max(typeI_max, r.typeI);
    if (std::isfinite(r.H_sup)) H_max = std::isnan(H_max) ? r.H_sup : std::max(H_max, r.H_sup);
    if (std::isfinite(r.G_inf)) G_inf = std::isnan(G_inf) ? r.G_inf : std::min(G_inf, r.G_inf);
    if (std::isfinite(r.vol_quad) && r.vol_class > 0) {
      const double e = std::abs(r.vol_quad - r.vol_class) / r.vol_class;
      vol_err = std::isnan(vol_err) ? e : std::max(vol_err, e);
    }
  }
  json j;
  j["regime"] = to_string(trace.regime);
  try {
    j["regime_measured"] = to_string(regime_indicator(trace));
  } catch (const std::invalid_argument&) {
    j["regime_measured"] = nullptr;
  }
  j["T"] = trace.T;
  j["n"] = trace.n;
  j["rows"] = trace.rows.size();
  j["t_final"] = trace.rows.empty() ? json(nullptr) : json(trace.rows.back().t);
  j["typeI_max"] = num(typeI_max);
  j["lambda_div_final"] = trace.rows.empty() ? json(nullptr) : num(trace.rows.back().lambda_div_scaled);
  j["H_sup_max"] = num(H_max);
  j["G_inf_min"] = num(G_inf);
  j["vol_rel_err_max"] = num(vol_err);
  json cps = json::array();
  for (std::size_t idx : trace.checkpoint_rows) cps.push_back(trace.rows.at(idx).t);
  j["checkpoint_t"] = cps;
  return j.dump(2);
}

void write_summary_json(const FlowTrace& trace, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << summary_json(trace) << '\n';
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace calabi
