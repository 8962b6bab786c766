#pragma once

// Empirical sample measures by finite-window Cesaro averaging along one noise
// path, bounded observables, and the invariance residual.
//
// The atoms of mu_{t, theta_t w} are phi(t - s_j, s_j, theta_{s_j} w, xi)
// = u(t, s_j, w, xi) for stride-spaced s_j in [t - window, t), so every atom
// is a solution on the same (unshifted) path.

#include <cstdint>
#include <string>
#include <vector>

#include "slch/dynamics.hpp"

namespace slch {

struct MeasureAnchor {
  double t = 0.0;      // time the measure lives at
  double start = 0.0;  // left end of the averaging window
  std::uint64_t seed = 0;
  std::int64_t path_anchor = 0;  // grid index of time 0 on the base path
};

struct EmpiricalMeasure {
  std::vector<LatticeState> atoms;
  std::vector<double> weights;
  /// Start time s_j of the trajectory behind each atom.
  std::vector<double> starts;
  MeasureAnchor anchor;
  double window = 0.0;
  double stride = 0.0;
  /// Atoms before reservoir thinning (0 if no thinning happened).
  std::size_t thinned_from = 0;
  std::string averaging = "cesaro";

  std::size_t size() const noexcept { return atoms.size(); }
  /// Throws ConfigError on a broken measure (weights, shapes).
  void validate() const;
  std::string to_json() const;
};

/// Initial selection xi(s, theta_s w). Only constant states are registered; they
/// are trivially continuous in s and bounded, so they lie in the universe.
struct InitialSelection {
  LatticeState value;
  static InitialSelection constant(LatticeState v) { return {std::move(v)}; }
  const LatticeState& operator()(double) const { return value; }
};

struct Observable {
  enum class Kind { Constant, ClippedNormSq, SiteProjection, TanhSiteSum };
  Kind kind = Kind::Constant;
  double clip = 1.0;  // M for the clipped families
  int site = 0;

  double operator()(const LatticeState& u) const;
  /// sup |Upsilon| over the state space.
  double sup_bound() const;
  std::string name() const;
};

/// {1, min(|u|^2, M), clip(u_0, M), clip(u_1, M), tanh(sum u_i)}.
std::vector<Observable> default_observables(double clip = 100.0);

struct MeasureBuildOptions {
  SchemeConfig scheme;
  std::size_t atom_cap = 0;  // 0: keep all atoms
  std::uint64_t thinning_seed = 0;
  unsigned workers = 0;
};

/// Atoms u(t, s_j, w, xi) for s_j = start + j * stride, s_j < t.
EmpiricalMeasure build_measure_segment(const ModelSpec& spec, const NoisePath& path, double t, double start,
                                       double stride, const InitialSelection& xi,
                                       const MeasureBuildOptions& opt = {});
/// Window [tau, t].
EmpiricalMeasure build_measure(const ModelSpec& spec, const NoisePath& path, double t, double tau,
                               double stride, const InitialSelection& xi, const MeasureBuildOptions& opt = {});

double integrate_observable(const EmpiricalMeasure& mu, const Observable& obs);

/// Weighted combination of measures on the same time (atoms concatenated).
EmpiricalMeasure mix(const EmpiricalMeasure& a, double wa, const EmpiricalMeasure& b, double wb);

struct InvarianceRow {
  std::string observable;
  double lhs = 0.0;       // integral against mu_{tau + t_step}
  double pushed = 0.0;    // sum_j w_j Upsilon(phi(t_step, tau, w, u_j))
  double residual = 0.0;  // |lhs - pushed|
};

/// mu_at_tau and mu_later must come from the same path, share window and
/// stride, and mu_later.anchor.t = mu_at_tau.anchor.t + t_step.
std::vector<InvarianceRow> invariance_residual(const ModelSpec& spec, const NoisePath& path,
                                               const EmpiricalMeasure& mu_at_tau,
                                               const EmpiricalMeasure& mu_later, double t_step,
                                               const std::vector<Observable>& obs, const SchemeConfig& scheme);

/// Builds both measures and evaluates the residual.
std::vector<InvarianceRow> invariance_study(const ModelSpec& spec, const NoisePath& path, double tau,
                                            double window, double stride, double t_step,
                                            const InitialSelection& xi, const std::vector<Observable>& obs,
                                            const MeasureBuildOptions& opt = {});

}  // namespace slch
