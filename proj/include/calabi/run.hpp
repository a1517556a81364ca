#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "calabi/checkpoint.hpp"
#include "calabi/diagnostics.hpp"
#include "calabi/flow.hpp"

namespace calabi {

struct RunOptions {
  int checkpoints = 10;        ///< J: checkpoints at t_j = T(1 - 2^{-j}), j = 1..J
  std::string checkpoint_dir;  ///< written there when non-empty
  std::ostream* log = nullptr;  ///< one "t=.. dt=.. iters=.. res=.." line per step
  std::function<void(const FlowState&)> on_step;  ///< every accepted state
  CtVariant ct = CtVariant::Log;  ///< used for the canonical seed
};

struct RunResult {
  FlowTrace trace;
  FlowState final_state;
  std::vector<IndexedProfile> checkpoints;
  std::string stop_reason;  ///< "stop time" or "degeneracy floor"
  int steps = 0;
};

/// Carries the trace up to the failing step.
class RunError : public std::runtime_error {
 public:
  RunError(const std::string& what, RunResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

double checkpoint_time(double T, int j);

/// max(t_stop_fraction T, t_J): the last checkpoint is always reached.
double stop_time(double T, const StepControl& ctl, int J);

/// Integrates from the canonical seed until the stop time or until the
/// degeneracy floor is hit. Step failures raise RunError.
RunResult run(const FlowParams& params, const StepControl& ctl, const RhoGrid& grid,
              const MonitorSet& monitors, const RunOptions& opts = {});

/// Same, starting from a given state (e.g. a loaded checkpoint).
RunResult run_from(FlowState seed, const StepControl& ctl, const MonitorSet& monitors,
                   const RunOptions& opts = {});

}  // namespace calabi
