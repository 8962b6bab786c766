#pragma once

// Pathwise integration of the conjugated random ODE, the u <-> v transforms,
// a direct Euler-Maruyama scheme for the SDE and the cocycle phi.
//
// k > 0:  v = exp(-k z(theta_t w)) (u + h(t)/k)
//         dv/dt = F1 + F2 + F3
//         F1 = -A^2 v + (k z - lambda) v  [- (k^2/2) v under the Ito reading]
//         F2 = exp(-k z) (-A f(exp(k z) v - h/k) + g(t, exp(k z) v - h/k))
//         F3 = exp(-k z) (A^2 h + lambda h + h') / k
// k = 0:  v = u - z(theta_t w) h(t)
//         dv/dt = -A^2 v - lambda v - A f(v + z h) + g(t, v + z h)
//                 + z (-A^2 h + (1 - lambda) h - h')

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slch/lattice.hpp"
#include "slch/model.hpp"
#include "slch/noise.hpp"

namespace slch {

enum class Scheme { ExplicitEuler, RK4, ImexSplit };
enum class Frame { VFrame, UFrame };

std::string_view scheme_name(Scheme s) noexcept;
Scheme parse_scheme(std::string_view name);
std::string_view frame_name(Frame f) noexcept;

struct SchemeConfig {
  Scheme scheme = Scheme::ImexSplit;
  double dt = 1e-2;
  /// Record every n-th step (the last step is always recorded).
  std::size_t record_stride = 1;
  double blowup_threshold = 1e8;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string spec_hash;
  std::string scheme;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<LatticeState> states;
  /// Grid node of each recorded time on the driving path.
  std::vector<std::size_t> path_nodes;
  Frame frame = Frame::VFrame;
  double dt = 0.0;
  Provenance provenance;

  const LatticeState& final_state() const { return states.back(); }
};

/// Individual drift contributions; total() = F1 + F2 + F3.
struct DriftTerms {
  LatticeState F1, F2, F3;
  LatticeState total() const { return F1 + F2 + F3; }
};

/// Drift of the k > 0 random ODE. WrongRegimeError for k = 0.
DriftTerms drift_k_pos_terms(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v);
LatticeState drift_k_pos(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v);
/// Drift of the k = 0 random ODE. WrongRegimeError for k > 0.
DriftTerms drift_k_zero_terms(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v);
LatticeState drift_k_zero(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v);
/// Dispatch on the regime.
LatticeState drift(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v);

LatticeState v_to_u(const ModelSpec& spec, const OuSamples& ou, double t, const LatticeState& v);
LatticeState u_to_v(const ModelSpec& spec, const OuSamples& ou, double t, const LatticeState& u);

/// Drift and diffusion of the SDE in the u variable (Ito form).
LatticeState ito_drift(const ModelSpec& spec, double t, const LatticeState& u);
LatticeState diffusion(const ModelSpec& spec, double t, const LatticeState& u);

/// Called with (time, state) at every recorded step; may be empty.
using StepObserver = std::function<void(double, const LatticeState&)>;

/// v-frame trajectory on [tau, T]. The scheme step must be a multiple of the
/// path step and tile [tau, T]; both ends must lie in the usable OU span.
Trajectory integrate(const ModelSpec& spec, const NoisePath& path, const OuSamples& ou, double tau,
                     double T, const LatticeState& v_tau, const SchemeConfig& scheme,
                     const StepObserver& observer = {});
/// Final state only (no recording).
LatticeState advance(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& v_tau, const SchemeConfig& scheme);
/// Final state, handing every scheme node (tau included) to the observer.
LatticeState advance(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& v_tau, const SchemeConfig& scheme, const StepObserver& observer);

/// u-frame left-point stepping u += F(t,u) dt + (k u + h(t)) dW on the path increments.
Trajectory euler_maruyama(const ModelSpec& spec, const NoisePath& path, double tau, double T,
                          const LatticeState& u_tau, double dt, std::size_t record_stride = 1);

/// u(T, tau, omega, u_tau) via transform, integrate and inverse transform.
LatticeState solve_u(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& u_tau, const SchemeConfig& scheme);

/// phi(t, tau, omega, u) = u(t + tau, tau, theta_{-tau} omega, u).
LatticeState cocycle(const ModelSpec& spec, double t, double tau, const NoisePath& path,
                     const LatticeState& u_tau, const SchemeConfig& scheme);

struct EnergyStep {
  double t;
  /// (|v_{n+1}|^2 - |v_n|^2)/dt + (lambda - 2 k z) |v_n|^2
  double quotient;
  /// exp(-2 k z) Q_1(t); the inequality reads quotient <= c * weight
  double weight;
};

std::vector<EnergyStep> energy_profile(const ModelSpec& spec, const OuSamples& ou, const Trajectory& traj);
/// Smallest c with quotient <= c * weight on every step.
double calibrate_energy_constant(const std::vector<EnergyStep>& steps);
double energy_fraction_satisfied(const std::vector<EnergyStep>& steps, double c);

/// CSV with a provenance header: "# seed=..., spec=..., scheme=..., frame=..." then t,site_...
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace slch
