#include <cmath>
#include <limits>
#include <sstream>

#include "calabi/diagnostics.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"

using namespace calabi;
using doctest::Approx;

namespace {

const FlowParams kContract{2, 1, 1.0, 4.0};

FlowState seed_state(const FlowParams& p = kContract, int N = 1025) {
  return initial_state(p, RhoGrid(16.0, N));
}

// Scales u by K and moves T so that T - t scales by K as well.
FlowState scaled(const FlowState& s, Real K) {
  FlowState q = s;
  for (RealVector* v : {&q.profile.u, &q.profile.du, &q.profile.d2u, &q.profile.d3u, &q.profile.d4u})
    for (Real& x : *v) x *= K;
  q.profile.cls = s.profile.cls.scaled(K);
  return q;
}

FlowState flat_state() {
  FlowState s;
  s.params = {3, 1, 1e-6, 1e6};
  CalabiProfile& p = s.profile;
  p.grid = RhoGrid(3.0, 257);
  for (Real x : p.grid.nodes())
    for (RealVector* v : {&p.u, &p.du, &p.d2u, &p.d3u, &p.d4u}) v->push_back(qexp(x));
  p.cls = {Real(1e-6), Real(1e6)};
  return s;
}

TraceRow row_at(double t, double vol, int n = 2) {
  TraceRow r{};
  r.t = t;
  r.vol_quad = vol;
  r.vol_ratio = vol / (1.0 - t);
  r.sigma.assign(static_cast<std::size_t>(n - 1), 0.0);
  return r;
}

FlowTrace power_trace(double p) {
  FlowTrace tr;
  tr.T = 1.0;
  for (double tau = 0.2; tau >= 5e-4; tau *= 0.8) tr.rows.push_back(row_at(1 - tau, 3 * std::pow(tau, p)));
  return tr;
}

}  // namespace

TEST_CASE("type_one_ratio on a synthetic proxy") {
  const double T = 1.0, t = 0.75, c = 3.5;
  std::vector<double> proxy(100, 0.1);
  proxy[40] = c / (T - t);
  CHECK(type_one_ratio(proxy, t, T) == Approx(c).epsilon(1e-15));
  CHECK_THROWS_AS(type_one_ratio(proxy, 1.0, T), std::domain_error);
  CHECK_THROWS_AS(type_one_ratio(seed_state(), 0.0), std::domain_error);
}

TEST_CASE("scaled monitors vanish on the flat model") {
  const FlowState f = flat_state();
  CHECK(type_one_ratio(f, 1.0) < 1e-25);
  CHECK(std::abs(c4_min_scaled(f, 1.0)) < 1e-25);
  CHECK(sigma_bound_ratio(f, 1.0, 2) < 1e-25);
  CHECK(sigma_bound_ratio(f, 1.0, 3) < 1e-25);
}

TEST_CASE("divisor eigenvalue at t = 0 is 1 for the contract seed") {
  CHECK(divisor_eigenvalue_scaled(seed_state(), 1.0) == Approx(1.0).epsilon(1e-5));
  const FlowParams p3{3, 1, 2.0, 9.0};
  CHECK(divisor_eigenvalue_scaled(seed_state(p3), singular_time(p3).T) == Approx(1.0).epsilon(1e-5));
}

TEST_CASE("divisor eigenvalue with u'(-L) = 2 a_t is one half") {
  FlowState s = seed_state();
  s.profile.du[0] = 2 * s.profile.cls.a;
  CHECK(divisor_eigenvalue_scaled(s, 1.0) == Approx(0.5).epsilon(1e-5));
}

TEST_CASE("divisor monitor is disabled outside the Contract regime") {
  CHECK(std::isnan(divisor_eigenvalue_scaled(seed_state({2, 1, 1, 2}), 0.5)));
  CHECK(std::isnan(divisor_eigenvalue_scaled(seed_state({2, 1, 1, 3}), 1.0)));
}

TEST_CASE("c4 and bisectional minima of the contract seed") {
  const FlowState s = seed_state();
  const CalabiProfile& p = s.profile;
  const int c = p.grid.center();
  const double u2 = to_double(p.d2u[c]), u3 = to_double(p.d3u[c]), u4 = to_double(p.d4u[c]);
  CHECK(-u4 / (u2 * u2) + u3 * u3 / (u2 * u2 * u2) == Approx(2.0 / 3).epsilon(1e-14));

  double m = std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < p.size(); ++i) {
    const long double r = to_double(p.grid.node(i));
    const oracle::Seed o = oracle::seed(1, 4, r);
    m = std::min(m, double(-o.d4u / (o.d2u * o.d2u) + o.d3u * o.d3u / (o.d2u * o.d2u * o.d2u)));
  }
  CHECK(c4_min_scaled(s, 1.0) == Approx(m).epsilon(1e-9));

  const BisectionalComponents b = bisectional_components(p, 2);
  CHECK(b.r1111[c] > 0);
  CHECK(b.r11kk[c] > 0);
  CHECK(b.rkkkk[c] > 0);
  const double bm = bisectional_min_scaled(s, 1.0);
  CHECK(std::isfinite(bm));
  CHECK(bm == Approx(bisectional_min(s)).epsilon(1e-15));
}

TEST_CASE("sigma bound ratio of the contract seed") {
  const FlowState s = seed_state();
  const CurvatureSample c = sample_curvature(s.profile, 2);
  const int mid = s.profile.grid.center();
  CHECK(std::abs(c.sigma[2][mid]) / c.rm_proxy[mid] == Approx(0.68).epsilon(1e-13));
  double m = 0;
  for (std::size_t i = 0; i < c.rm_proxy.size(); ++i)
    m = std::max(m, std::abs(c.lambda1[i] * c.lambda2[i]) / c.rm_proxy[i]);
  CHECK(sigma_bound_ratio(s, 1.0, 2) == Approx(m).epsilon(1e-12));
  CHECK_THROWS_AS(sigma_bound_ratio(s, 1.0, 1), std::out_of_range);
  CHECK_THROWS_AS(sigma_bound_ratio(s, 1.0, 3), std::out_of_range);
}

TEST_CASE("scaled monitors are invariant under (u, T - t) -> (K u, K (T - t))") {
  FlowState s = seed_state({3, 1, 2.0, 9.0}, 513);
  s = advance(s, 0.05, StepControl{});
  const double T = singular_time(s.params).T, t = s.t();
  for (double K : {0.1, 7.0, 250.0}) {
    const FlowState q = scaled(s, K);
    const double TK = t + K * (T - t);
    CHECK(type_one_ratio(q, TK) == Approx(type_one_ratio(s, T)).epsilon(1e-10));
    CHECK(c4_min_scaled(q, TK) == Approx(c4_min_scaled(s, T)).epsilon(1e-10));
    CHECK(bisectional_min_scaled(q, TK) == Approx(bisectional_min_scaled(s, T)).epsilon(1e-10));
    CHECK(divisor_eigenvalue_scaled(q, TK) == Approx(divisor_eigenvalue_scaled(s, T)).epsilon(1e-10));
    for (int k = 2; k <= 3; ++k)
      CHECK(sigma_bound_ratio(q, TK, k) == Approx(sigma_bound_ratio(s, T, k)).epsilon(1e-10));
  }
}

TEST_CASE("total volume equals the class value") {
  const RhoGrid g(16.0, 2049);
  const Volume v = total_volume(build_canonical_profile({1, 4}, g), 2);
  CHECK(v.cls == Approx(7.5).epsilon(1e-15));
  CHECK(std::abs(v.quad - 7.5) < 1e-6);

  const Volume v3 = total_volume(build_canonical_profile({1, 4}, g), 3);
  CHECK(v3.cls == Approx(21.0).epsilon(1e-15));
  CHECK(std::abs(v3.quad - 21.0) < 1e-6 * 21);

  const Volume thin = total_volume(build_canonical_profile({1, 1 + 1e-7}, g), 2);
  CHECK(thin.cls == Approx(1e-7).epsilon(1e-6));
  CHECK(thin.quad == Approx(thin.cls).epsilon(1e-6));

  const FlowParams shrink{2, 1, 1, 3};
  const KahlerClass c = class_at(shrink, 0.3);
  const Volume vs = total_volume(build_canonical_profile(c, g), 2);
  CHECK(vs.cls == Approx(4 * 0.7 * 0.7).epsilon(1e-13));
  CHECK(vs.quad == Approx(vs.cls).epsilon(1e-6));
}

TEST_CASE("lemma bounds of the seed") {
  const CalabiProfile p = build_canonical_profile({1, 4}, RhoGrid(16.0, 2049));
  double hs = 0;
  for (int i = 0; i < p.size(); ++i) {
    const oracle::Seed o = oracle::seed(1, 4, to_double(p.grid.node(i)));
    hs = std::max(hs, double(o.d2u / o.du));
  }
  const LemmaBounds lb = lemma_bounds(p);
  CHECK(lb.H_sup == Approx(hs).epsilon(1e-12));
  CHECK(lb.G_sup == Approx(1.0).epsilon(1e-6));
  CHECK(lb.G_inf == Approx(-1.0).epsilon(1e-6));
  CHECK(lb.G_sup <= 1.0);
  CHECK(lb.G_inf >= -1.0);
}

TEST_CASE("alpha_n is pi/sqrt 2 and the diameter follows sqrt a_t") {
  for (int n : {2, 3, 7}) CHECK(alpha_n(n) == Approx(M_PI / std::sqrt(2.0)).epsilon(1e-9));
  CHECK_THROWS_AS(alpha_n(1), std::invalid_argument);

  FlowState s = seed_state();
  CHECK(divisor_diameter(s) == Approx(alpha_n(2)).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) {
    s = advance(s, 0.1, StepControl{});
    const double a = to_double(s.profile.cls.a);
    CHECK(divisor_diameter(s) / std::sqrt(a) == Approx(alpha_n(2)).epsilon(1e-12));
    CHECK(divisor_diameter(s) / std::sqrt(1.0 - s.t()) == Approx(alpha_n(2)).epsilon(1e-12));
  }
}

TEST_CASE("regime_indicator on synthetic volume laws") {
  CHECK(regime_indicator(power_trace(0)) == Regime::Contract);
  CHECK(regime_indicator(power_trace(1)) == Regime::Collapse);
  CHECK(regime_indicator(power_trace(2)) == Regime::Shrink);

  FlowTrace short_tr = power_trace(1);
  while (short_tr.rows.back().t > 0.95) short_tr.rows.pop_back();
  CHECK_THROWS_AS(regime_indicator(short_tr), std::invalid_argument);
  CHECK_THROWS_AS(regime_indicator(FlowTrace{}), std::invalid_argument);
}

TEST_CASE("MonitorSet validation") {
  MonitorSet m;
  CHECK_NOTHROW(m.validate());
  m.cadence = 0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  const MonitorSet none = MonitorSet::none();
  CHECK_FALSE(none.curvature);
  CHECK_FALSE(none.volume);
}

TEST_CASE("sample_row with monitors disabled keeps only time and class") {
  const FlowState s = seed_state();
  const TraceRow r = sample_row(s, singular_time(s.params), MonitorSet::none());
  CHECK(r.t == 0);
  CHECK(r.a == 1);
  CHECK(r.b == 4);
  CHECK(std::isnan(r.typeI));
  CHECK(std::isnan(r.vol_quad));
  CHECK(std::isnan(r.H_sup));
  CHECK(std::isnan(r.diam));
  CHECK(std::isnan(r.sigma.at(0)));

  const TraceRow full = sample_row(s, singular_time(s.params), MonitorSet::all());
  CHECK(full.typeI == Approx(type_one_ratio(s, 1.0)));
  CHECK(full.vol_ratio == Approx(full.vol_quad));
}

TEST_CASE("trace CSV header") {
  std::vector<std::string> h = trace_header(2);
  std::string joined;
  for (const auto& c : h) joined += (joined.empty() ? "" : ",") + c;
  CHECK(joined ==
        "t,a,b,supRm,typeI,H_sup,G_sup,G_inf,bisec_min,bisec_min_scaled,c4_min_scaled,"
        "lambda_div_scaled,sigma2,vol_quad,vol_class,vol_ratio,diam,dt,iters");
  CHECK(trace_header(4).size() == h.size() + 2);
  CHECK(trace_header(4)[14] == "sigma4");
}

TEST_CASE("empty trace writes a header-only CSV") {
  FlowTrace tr;
  tr.n = 3;
  std::ostringstream os;
  write_trace_csv(tr, os);
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 1);
  std::istringstream is(s);
  CHECK(parse_trace_csv(is).rows.empty());
}

TEST_CASE("one-row trace round-trips through the CSV") {
  FlowState s = advance(seed_state({3, 1, 2, 9}, 513), 0.01, StepControl{});
  FlowTrace tr;
  tr.n = 3;
  tr.rows.push_back(sample_row(s, singular_time(s.params), MonitorSet::all()));
  tr.rows.back().lambda_div_scaled = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream os;
  write_trace_csv(tr, os);

  std::istringstream line_check(os.str());
  std::string header, line;
  std::getline(line_check, header);
  std::getline(line_check, line);
  CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(trace_header(3).size()));

  std::istringstream is(os.str());
  const FlowTrace back = parse_trace_csv(is);
  REQUIRE(back.rows.size() == 1);
  CHECK(back.n == 3);
  const TraceRow &a = tr.rows[0], &b = back.rows[0];
  CHECK(b.t == a.t);
  CHECK(b.typeI == a.typeI);
  CHECK(b.H_sup == a.H_sup);
  CHECK(b.sigma == a.sigma);
  CHECK(b.vol_quad == a.vol_quad);
  CHECK(b.diam == a.diam);
  CHECK(b.iters == a.iters);
  CHECK(std::isnan(b.lambda_div_scaled));
}

TEST_CASE("trace CSV parser rejects foreign input") {
  std::istringstream bad("t,a,b\n1,2,3\n");
  CHECK_THROWS(parse_trace_csv(bad));
  std::ostringstream os;
  FlowTrace tr;
  write_trace_csv(tr, os);
  std::istringstream ragged(os.str() + "1,2\n");
  CHECK_THROWS(parse_trace_csv(ragged));
}

TEST_CASE("summary JSON carries the run summary") {
  FlowTrace tr = power_trace(0);
  tr.regime = Regime::Contract;
  for (auto& r : tr.rows) r.typeI = 2.0;
  const auto j = nlohmann::json::parse(summary_json(tr));
  CHECK(j.at("regime") == "Contract");
  CHECK(j.at("T") == 1.0);
  CHECK(j.at("t_final").get<double>() == Approx(tr.rows.back().t));
  CHECK(j.at("typeI_max") == 2.0);
  CHECK(j.contains("lambda_div_final"));
}
