#include "calabi/run.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

namespace calabi {

double checkpoint_time(double T, int j) { return T * (1 - std::ldexp(1.0, -j)); }

double stop_time(double T, const StepControl& ctl, int J) {
  double t = ctl.t_stop_fraction * T;
  if (J >= 1) t = std::max(t, checkpoint_time(T, J));
  return t;
}

RunResult run(const FlowParams& params, const StepControl& ctl, const RhoGrid& grid,
              const MonitorSet& monitors, const RunOptions& opts) {
  return run_from(initial_state(params, grid, opts.ct), ctl, monitors, opts);
}

RunResult run_from(FlowState seed, const StepControl& ctl, const MonitorSet& monitors,
                   const RunOptions& opts) {
  ctl.validate();
  monitors.validate();
  if (opts.checkpoints < 0) throw std::invalid_argument("run: checkpoint count must be >= 0");
  const SingularTimeInfo info = singular_time(seed.params);
  const double T = info.T;
  const double t_end = stop_time(T, ctl, opts.checkpoints);
  const double snap = 1e-13 * T;
  if (!opts.checkpoint_dir.empty()) std::filesystem::create_directories(opts.checkpoint_dir);

  RunResult res;
  res.trace.n = seed.params.n;
  res.trace.T = T;
  res.trace.regime = info.regime;
  FlowState state = std::move(seed);

  int next_j = 1;
  while (next_j <= opts.checkpoints && checkpoint_time(T, next_j) <= state.t() + snap) ++next_j;

  auto record = [&](bool checkpoint) {
    if (res.trace.rows.empty() || state.t() > res.trace.rows.back().t)
      res.trace.rows.push_back(sample_row(state, info, monitors));
    if (!checkpoint) return;
    res.trace.checkpoint_rows.push_back(res.trace.rows.size() - 1);
    res.checkpoints.push_back({next_j, state.profile});
    if (!opts.checkpoint_dir.empty())
      write_checkpoint({state.params.n, state.params.k, state.profile},
                       (std::filesystem::path(opts.checkpoint_dir) / checkpoint_filename(next_j)).string());
    ++next_j;
  };

  record(false);
  try {
    while (state.t() < t_end - snap) {
      double cap = t_end - state.t();
      bool to_checkpoint = false;
      if (next_j <= opts.checkpoints) {
        const double gap = checkpoint_time(T, next_j) - state.t();
        if (gap <= cap) {
          cap = gap;
          to_checkpoint = true;
        }
      }
      try {
        state = step(state, ctl, cap);
      } catch (const DegenerateProfile&) {
        res.stop_reason = "degeneracy floor";
        break;
      }
      ++res.steps;
      const bool hit = to_checkpoint && std::abs(state.t() - checkpoint_time(T, next_j)) <= snap;
      if (opts.log)
        *opts.log << "t=" << state.t() << " dt=" << state.step_stats.dt
                  << " iters=" << state.step_stats.newton_iters
                  << " res=" << state.step_stats.residual << '\n';
      if (opts.on_step) opts.on_step(state);
      const bool last = state.t() >= t_end - snap;
      if (hit || last || res.steps % monitors.cadence == 0) record(hit);
    }
  } catch (const StepFailure& e) {
    res.final_state = state;
    res.stop_reason = "step failure";
    throw RunError(e.what(), std::move(res));
  }
  if (res.stop_reason.empty()) res.stop_reason = "stop time";
  record(false);
  res.final_state = std::move(state);
  return res;
}

}  // namespace calabi
