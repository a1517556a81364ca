#pragma once

#include <stdexcept>
#include <string>

#include "calabi/diagnostics.hpp"
#include "calabi/flow.hpp"

namespace calabi {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  FlowParams params;
  double L = 16.0;
  int N = 2049;
  StepControl ctl;
  MonitorSet monitors;
  std::string output_dir = "out";
  int checkpoints = 10;
  std::string seed = "canonical";  ///< "canonical" or a checkpoint path
  CtVariant ct = CtVariant::Log;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// "contract" (2,1,1,4), "collapse" (2,1,1,2), "shrink" (2,1,1,3).
RunConfig preset(const std::string& name);

/// Parses "key = value" lines with [section] headers and '#' comments on top
/// of `base`. Sections: flow (n, k, a0, b0, ct), grid (L, N), step (dt_init,
/// dt_min, dt_max, tol_newton, tol_step, stop_frac, floor_u2, max_newton),
/// monitors (cadence, curvature, divisor, lemma, volume, diameter), output
/// (dir, checkpoints), seed (profile). Unknown keys and bad values raise
/// ConfigError with the key and line.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

std::string to_string(CtVariant v);
CtVariant parse_ct_variant(const std::string& s);

}  // namespace calabi
