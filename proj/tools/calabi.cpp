// Command-line front end: run, blowup, validate, soliton, sweep.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "calabi/blowup.hpp"
#include "calabi/checkpoint.hpp"
#include "calabi/config.hpp"
#include "calabi/curvature.hpp"
#include "calabi/run.hpp"

namespace fs = std::filesystem;
using namespace calabi;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;
constexpr int kRegimeMismatch = 4;

struct Overrides {
  std::string config;
  std::string preset;
  std::string out;
  std::string ct;
  std::optional<double> L;
  std::optional<int> N;
  std::optional<double> stop_frac;
  std::optional<int> checkpoints;
};

void add_overrides(CLI::App* sub, Overrides& o, bool with_preset = true) {
  sub->add_option("--config", o.config, "config file (key = value with [sections])");
  if (with_preset)
    sub->add_option("--preset", o.preset, "scenario preset")
        ->check(CLI::IsMember({"contract", "collapse", "shrink"}));
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--ct", o.ct, "c_t variant")->check(CLI::IsMember({"log", "literal"}));
  sub->add_option("--L", o.L, "half-width of the rho domain");
  sub->add_option("--N", o.N, "grid points (odd, >= 257)");
  sub->add_option("--stop-frac", o.stop_frac, "stop at this fraction of T");
  sub->add_option("--checkpoints", o.checkpoints, "checkpoint count J");
}

RunConfig build_config(const Overrides& o, const std::string& preset_name) {
  RunConfig c = preset_name.empty() ? RunConfig{} : preset(preset_name);
  if (!o.config.empty()) c = load_config(o.config, c);
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.ct.empty()) c.ct = parse_ct_variant(o.ct);
  if (o.L) c.L = *o.L;
  if (o.N) c.N = *o.N;
  if (o.stop_frac) c.ctl.t_stop_fraction = *o.stop_frac;
  if (o.checkpoints) c.checkpoints = *o.checkpoints;
  c.validate();
  return c;
}

void write_outputs(const RunResult& r, const std::string& dir) {
  write_trace_csv(r.trace, (fs::path(dir) / "trace.csv").string());
  write_summary_json(r.trace, (fs::path(dir) / "summary.json").string());
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  fs::create_directories(cfg.output_dir);
  std::ofstream log((fs::path(cfg.output_dir) / "run.log").string());
  RunOptions opts;
  opts.checkpoints = cfg.checkpoints;
  opts.checkpoint_dir = cfg.output_dir;
  opts.log = &log;
  opts.ct = cfg.ct;
  const RhoGrid grid(cfg.L, cfg.N);
  RunResult r;
  try {
    if (cfg.seed == "canonical") {
      r = run(cfg.params, cfg.ctl, grid, cfg.monitors, opts);
    } else {
      Checkpoint cp = read_checkpoint(cfg.seed);
      if (cp.n != cfg.params.n || cp.k != cfg.params.k)
        throw ConfigError("seed checkpoint (n, k) does not match the configuration", "seed.profile");
      r = run_from(state_from_profile(cfg.params, std::move(cp.profile), cfg.ct), cfg.ctl,
                   cfg.monitors, opts);
    }
  } catch (const RunError& e) {
    write_outputs(e.partial(), cfg.output_dir);
    out << "numerical failure: " << e.what() << " at t=" << e.partial().final_state.t()
        << " (partial trace written)\n";
    return kNumericalFailure;
  }
  write_outputs(r, cfg.output_dir);
  const SingularTimeInfo info = singular_time(cfg.params);
  out << "regime " << to_string(info.regime) << "  T=" << info.T
      << "  t_final=" << r.trace.rows.back().t << "  steps=" << r.steps << "  (" << r.stop_reason
      << ")\n";
  try {
    const Regime measured = regime_indicator(r.trace);
    out << "regime_indicator " << to_string(measured) << '\n';
    if (measured != info.regime) {
      out << "regime mismatch: predicted " << to_string(info.regime) << ", measured "
          << to_string(measured) << '\n';
      return kRegimeMismatch;
    }
  } catch (const std::invalid_argument& e) {
    out << "regime_indicator unavailable: " << e.what() << '\n';
  }
  return kOk;
}

int cmd_blowup(const RunConfig& cfg, std::ostream& out) {
  const SingularTimeInfo info = singular_time(cfg.params);
  if (info.regime != Regime::Contract) {
    out << "blow-up analysis needs the Contract regime (the exceptional divisor must shrink "
           "first); this configuration is "
        << to_string(info.regime) << '\n';
    return kRegimeMismatch;
  }
  if (cfg.checkpoints < 3) {
    out << "need >= 3 checkpoints (J = " << cfg.checkpoints << ")\n";
    return kConfigError;
  }
  std::vector<IndexedProfile> cps;
  for (int j = 1; j <= cfg.checkpoints; ++j) {
    const fs::path p = fs::path(cfg.output_dir) / checkpoint_filename(j);
    if (!fs::exists(p)) continue;
    Checkpoint c = read_checkpoint(p.string());
    if (c.n != cfg.params.n || c.k != cfg.params.k)
      throw ConfigError("checkpoint " + p.string() + " has a different (n, k)");
    cps.push_back({j, std::move(c.profile)});
  }
  if (cps.size() < 3) {
    out << "need >= 3 checkpoints, found " << cps.size() << " in " << cfg.output_dir << '\n';
    return kConfigError;
  }
  const BlowupReport rep = blowup_report(cps, cfg.params);
  write_blowup_csv(rep, (fs::path(cfg.output_dir) / "blowup.csv").string());
  std::ofstream js((fs::path(cfg.output_dir) / "blowup.json").string());
  js << blowup_json(rep) << '\n';
  out << blowup_csv(rep);
  return kOk;
}

int cmd_validate(const std::string& path, std::ostream& out) {
  Checkpoint c;
  try {
    c = read_checkpoint(path);
  } catch (const CheckpointError& e) {
    out << "parse error: " << e.what() << '\n';
    return kConfigError;
  }
  const ValidationReport rep = validate_profile(c.profile, 1e-8);
  if (!rep.ok()) {
    out << "FAIL\n" << rep.summary();
    return kNumericalFailure;
  }
  const std::vector<double> R = scalar_curvature(c.profile, c.n);
  const RicciEigenvalues ev = ricci_eigenvalues(c.profile, c.n);
  for (int i = 1; i + 1 < c.profile.size(); ++i) {
    const double sum = ev.lambda1[i] + (c.n - 1) * ev.lambda2[i];
    if (std::abs(sum - R[i]) > 1e-6 * std::max(std::abs(R[i]), 1e-12)) {
      out << "FAIL\nscalar curvature identity at node " << i << " (" << R[i] << " vs " << sum
          << ")\n";
      return kNumericalFailure;
    }
  }
  out << "PASS  n=" << c.n << " k=" << c.k << " t=" << c.profile.t << " N=" << c.profile.size()
      << '\n';
  return kOk;
}

int cmd_soliton(int n, int k, double a_hat, double x_max, const std::string& path,
                std::ostream& out) {
  MomentProfile m;
  try {
    m = fik_reference(n, k, a_hat, x_max);
  } catch (const std::invalid_argument& e) {
    out << e.what() << '\n';
    return kConfigError;
  }
  const SolitonFit fit = soliton_residual(m, n, 0.5);
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "x,phi,dphi\n";
  char buf[96];
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", m.x()[i], m.phi()[i], m.dphi()[i]);
    os << buf;
  }
  std::ofstream cert(path + ".json");
  cert << "{\"n\": " << n << ", \"k\": " << k << ", \"a_hat\": " << a_hat
       << ", \"lambda\": " << fit.lambda << ", \"mu\": " << fit.mu << ", \"c\": " << fit.c
       << ", \"residual_rms\": " << fit.residual_rms << "}\n";
  out << "mu=" << fit.mu << " c=" << fit.c << " residual_rms=" << fit.residual_rms << '\n';
  return fit.residual_rms <= 1e-10 ? kOk : kNumericalFailure;
}

template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calabi-symmetric Kahler-Ricci flow on the blow-up of CP^n at a point"};
  app.require_subcommand(1);

  Overrides run_o, blow_o, sweep_o;
  auto* run_cmd = app.add_subcommand("run", "integrate the flow and write trace, summary, checkpoints");
  add_overrides(run_cmd, run_o);
  auto* blow_cmd = app.add_subcommand("blowup", "rescale the checkpoints in --out and compare with solitons");
  add_overrides(blow_cmd, blow_o);

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "check a checkpoint file");
  val_cmd->add_option("path", validate_path, "checkpoint JSON")->required();

  int sol_n = 2, sol_k = 1;
  double sol_a = 1.0, sol_xmax = 20.0;
  std::string sol_out = "fik.csv";
  auto* sol_cmd = app.add_subcommand("soliton", "sample the FIK candidate and certify its residual");
  sol_cmd->add_option("--n", sol_n, "complex dimension");
  sol_cmd->add_option("--k", sol_k, "divisor twist");
  sol_cmd->add_option("--a-hat", sol_a, "left endpoint of the moment interval");
  sol_cmd->add_option("--x-max", sol_xmax, "right end of the sampled interval");
  sol_cmd->add_option("--out", sol_out, "output CSV");

  std::vector<std::string> sweep_presets = {"contract", "collapse", "shrink"};
  auto* sweep_cmd = app.add_subcommand("sweep", "run several presets in parallel");
  add_overrides(sweep_cmd, sweep_o, false);
  sweep_cmd->add_option("--presets", sweep_presets, "presets to run")
      ->check(CLI::IsMember({"contract", "collapse", "shrink"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (run_cmd->parsed())
    return guarded([&] { return cmd_run(build_config(run_o, run_o.preset), std::cout); }, std::cerr);
  if (blow_cmd->parsed())
    return guarded([&] { return cmd_blowup(build_config(blow_o, blow_o.preset), std::cout); }, std::cerr);
  if (val_cmd->parsed()) return guarded([&] { return cmd_validate(validate_path, std::cout); }, std::cerr);
  if (sol_cmd->parsed())
    return guarded([&] { return cmd_soliton(sol_n, sol_k, sol_a, sol_xmax, sol_out, std::cout); },
                   std::cerr);

  // sweep
  std::vector<RunConfig> cfgs;
  const int bad = guarded(
      [&] {
        const std::string base = sweep_o.out.empty() ? "out" : sweep_o.out;
        for (const auto& name : sweep_presets) {
          Overrides o = sweep_o;
          o.out = (fs::path(base) / name).string();
          cfgs.push_back(build_config(o, name));
        }
        return kOk;
      },
      std::cerr);
  if (bad != kOk) return bad;
  std::mutex io;
  std::vector<int> codes(cfgs.size(), kOk);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    threads.emplace_back([&, i] {
      std::ostringstream msg;
      codes[i] = guarded([&] { return cmd_run(cfgs[i], msg); }, msg);
      std::lock_guard<std::mutex> lock(io);
      std::cout << "[" << sweep_presets[i] << "] " << msg.str();
    });
  for (auto& t : threads) t.join();
  return *std::max_element(codes.begin(), codes.end());
}
