#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "calabi/real.hpp"

namespace calabi {

/// Raised when a profile leaves the admissible set (u'' <= 0, u' out of
/// range, non-monotone moment map).
class InadmissibleProfile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flow parameters for X_{n,k} with initial class -a0[D_0] + b0[D_inf].
struct FlowParams {
  int n = 2;
  int k = 1;
  double a0 = 1.0;
  double b0 = 4.0;

  /// Throws std::invalid_argument unless n >= 2, k >= 1, 0 < a0 < b0.
  void validate() const;
};

/// Kahler class -a[D_0] + b[D_inf].
struct KahlerClass {
  Real a = 1;
  Real b = 2;

  bool in_cone() const { return a > 0 && a < b; }
  KahlerClass scaled(Real factor) const { return {a * factor, b * factor}; }
};

enum class Regime { Contract, Collapse, Shrink };

std::string to_string(Regime r);
/// Accepts "Contract"/"contract" etc.; throws std::invalid_argument.
Regime parse_regime(const std::string& s);

struct SingularTimeInfo {
  double T = 0;
  Regime regime = Regime::Contract;
  double Ta = 0;  ///< time at which a_t reaches 0
  double Tb = 0;  ///< time at which b_t - a_t reaches 0
};

/// Uniform grid on [-L, L] with an odd node count so that rho = 0 is a node.
class RhoGrid {
 public:
  static constexpr int kMinNodes = 257;

  /// Throws std::invalid_argument for L <= 0, even N, or N < kMinNodes.
  RhoGrid(double half_width, int nodes);

  double half_width() const { return half_width_; }
  int size() const { return nodes_; }
  Real spacing() const { return spacing_; }
  Real node(int i) const { return -Real(half_width_) + spacing_ * i; }
  int center() const { return (nodes_ - 1) / 2; }
  RealVector nodes() const;

  bool operator==(const RhoGrid& o) const {
    return half_width_ == o.half_width_ && nodes_ == o.nodes_;
  }

 private:
  double half_width_;
  int nodes_;
  Real spacing_;
};

/// Calabi potential u(rho) sampled on a grid, with its first four
/// rho-derivatives. The metric is fully determined by u.
struct CalabiProfile {
  RhoGrid grid{12.0, RhoGrid::kMinNodes};
  RealVector u, du, d2u, d3u, d4u;
  KahlerClass cls;
  double t = 0;
  int twist = 1;  ///< k of X_{n,k}; sets the tail rate e^{k rho}

  int size() const { return grid.size(); }
};

struct Derivatives {
  RealVector du, d2u, d3u, d4u;
};

/// Class at time t: (a0 - (n-k)t, b0 - (n+k)t). Throws std::domain_error
/// "class left Kahler cone" at or after the singular time.
KahlerClass class_at(const FlowParams& params, double t);

SingularTimeInfo singular_time(const FlowParams& params);

/// u = a rho + ((b-a)/k) log(1 + e^{k rho}) with closed-form derivatives.
CalabiProfile build_canonical_profile(const KahlerClass& cls, const RhoGrid& grid,
                                      int twist = 1);

/// Fourth-order centered differences. Three ghost nodes on each side come
/// from the tail model u = a rho + c + alpha z + beta z^2 with z = e^{k rho}
/// (right side: b rho and z = e^{-k rho}), fitted to the three outermost
/// nodes. It satisfies u'' = k(u' - a) and u'' = k(b - u') up to O((u'')^2).
Derivatives differentiate(const RealVector& u, const RhoGrid& grid, const KahlerClass& cls,
                          int twist = 1);

/// Packs u with recomputed derivatives.
CalabiProfile make_profile(const RhoGrid& grid, RealVector u, const KahlerClass& cls, double t,
                           int twist = 1);

/// First derivative of an arbitrary nodal array with the same stencil, using
/// the given tail rates to extend it by e^{rate_left rho} / e^{-rate_right rho}.
RealVector differentiate_tail_array(const RealVector& f, const RhoGrid& grid, Real rate_left,
                                    Real rate_right);

struct Violation {
  std::string invariant;
  int node = -1;
  double value = 0;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool mentions(const std::string& invariant) const;
  std::string summary() const;
};

/// Checks u'' > 0, u' strictly increasing and inside (a, b), and the two
/// boundary closures relative to tol.
ValidationReport validate_profile(const CalabiProfile& p, double tol);

}  // namespace calabi
