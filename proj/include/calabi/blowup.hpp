#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calabi/checkpoint.hpp"
#include "calabi/moment.hpp"
#include "calabi/profile.hpp"

namespace calabi {

/// K g(t_j): u -> K u on the same rho grid, class (K a_t, K b_t).
struct RescaledProfile {
  double t = 0;
  double K = 1;
  CalabiProfile profile;
  MomentProfile moment;
};

/// Throws std::invalid_argument for K <= 0.
RescaledProfile rescale(const CalabiProfile& p, double K);

struct Window {
  double lo = 0;
  double hi = 0;
};

/// sup |phi1 - phi2| + sup |phi1' - phi2'| over `samples` equally spaced
/// points of the window. Throws std::invalid_argument for an empty window or
/// one that leaves either sampled domain.
double self_similarity_distance(const MomentProfile& m1, const MomentProfile& m2, const Window& w,
                                int samples = 801);
double self_similarity_distance(const RescaledProfile& r1, const RescaledProfile& r2,
                                const Window& w, int samples = 801);

struct SolitonFit {
  double lambda = 0.5;
  double mu = 0;
  double c = 0;
  double residual_rms = 0;
  std::size_t nodes = 0;
};

/// Weighted least squares for (mu, c) in
///   r(x) = n - (n-1) phi/x - phi' + (mu - lambda) x - c
/// over the sample nodes inside the window (all nodes when absent), with
/// trapezoid weights in x. Throws std::invalid_argument on singular normal
/// equations or fewer than 3 nodes.
SolitonFit soliton_residual(const MomentProfile& m, int n, double lambda,
                            const std::optional<Window>& window = std::nullopt);

/// phi(x) = (k/n)(x - a^n x^{1-n}) on [a_hat, x_max]. Throws
/// std::invalid_argument("no shrinker in this range") for k >= n.
MomentProfile fik_reference(int n, int k, double a_hat, double x_max = 20.0, int samples = 2001);

struct BlowupOptions {
  double lambda = 0.5;
  int first_j = 4;
  int samples = 801;
};

struct BlowupRow {
  int j = 0;
  double t = 0, K = 0, a_hat = 0;
  double selfsim_prev = 0;  ///< distance to checkpoint j-1 on the common window
  double soliton_rms = 0;
  double fik_dist = 0;
  double mu = 0, c = 0;
  Window window;
  double rm_left = 0;  ///< rescaled curvature proxy at rho = -L
};

struct BlowupReport {
  int n = 2, k = 1;
  double T = 0;
  double lambda = 0.5;
  std::vector<BlowupRow> rows;
};

/// [a_hat + 0.1, min(10, 0.5 K b_t)]
Window default_window(const RescaledProfile& r);

/// Rows for every checkpoint j >= first_j whose predecessor is present.
/// Throws std::invalid_argument with fewer than 3 checkpoints or outside the
/// Contract regime.
BlowupReport blowup_report(const std::vector<IndexedProfile>& checkpoints,
                           const FlowParams& params, const BlowupOptions& opts = {});

void write_blowup_csv(const BlowupReport& r, const std::string& path);
std::string blowup_csv(const BlowupReport& r);
std::string blowup_json(const BlowupReport& r);

}  // namespace calabi
