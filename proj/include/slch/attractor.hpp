#pragma once

// Probes of pullback absorption, the empirical absorbing radius, the universe
// condition and tail nullity. The attractor itself is never represented as a
// set; it is sampled through arrival states.

#include <optional>
#include <string>
#include <vector>

#include "slch/dynamics.hpp"

namespace slch {

/// One member of the initial family: u_0 = scale * (1 + t)^growth_power * direction.
struct InitialMember {
  double scale = 1.0;
  LatticeState direction;  // unit l^2 norm (or zero)
  std::string tag;
};

/// Scales x {flat, gaussian} unit directions. Spread-out directions keep the
/// explicit part of the scheme away from large single-site values.
std::vector<InitialMember> default_initial_family(int window_radius, Boundary boundary,
                                                  const std::vector<double>& scales,
                                                  std::size_t gaussian_directions = 1,
                                                  std::uint64_t seed = 0);

struct AbsorptionCell {
  double t = 0.0;            // pullback time
  std::size_t member = 0;    // index into the family
  double initial_norm = 0.0;
  double arrival_norm = 0.0;    // |u(tau, tau - t, theta_{-tau} w, u_0)|
  double arrival_v_norm = 0.0;  // same state in the v variable
};

struct AbsorptionExperiment {
  double tau = 0.0;
  std::vector<double> pullback_times;
  std::vector<InitialMember> family;
  double growth_power = 0.0;
  std::vector<AbsorptionCell> cells;  // ordered by (t, member)
  /// First pullback time after which max/min arrival <= 1.5 at every later time.
  std::optional<double> T0;
  /// Relative spread of the top-three max arrivals <= 10% (or all tiny).
  bool stabilized = false;
  /// max over members of the pairwise distance between arrival states, per pullback time.
  std::vector<double> endpoint_spread;

  std::vector<double> arrivals_at(std::size_t time_index) const;
};

/// Integrates phi(t, tau - t, theta_{-t} w, u_0) for every pullback time and member.
AbsorptionExperiment run_absorption(const ModelSpec& spec, const NoisePath& path, double tau,
                                    const std::vector<double>& pullback_times,
                                    const std::vector<InitialMember>& family, const SchemeConfig& scheme,
                                    double growth_power = 0.0, unsigned workers = 0);

/// Fills T0, stabilized and the spread summary from the recorded cells.
void summarize_absorption(AbsorptionExperiment& e);

struct RadiusEstimate {
  bool conclusive = false;
  double radius = 0.0;  // 1.25 x max arrival over the top three pullback times
  double max_arrival = 0.0;
  /// (s, Q_1(tau + s)) for s on [-t_max, 0]: the integrand profile of the
  /// analytic radius, whose constant c is not known.
  std::vector<std::pair<double, double>> q1_profile;
};

RadiusEstimate absorbing_radius_estimate(const AbsorptionExperiment& e, const ModelSpec* spec = nullptr,
                                         std::size_t profile_points = 64);

/// exp(-lambda0 t) * (scale (1 + t)^p)^2 along the pullback times: the universe
/// condition requires this to go to zero.
std::vector<double> universe_weights(double lambda0, double scale, double growth_power,
                                     const std::vector<double>& pullback_times);
/// Polynomial growth is always inside the universe; only exponential growth is not.
bool universe_condition_holds(double lambda0, double growth_power);

struct TailReport {
  double t = 0.0;
  std::vector<int> I;
  std::vector<double> tail_mass;        // sum_{|i| > I} v_i^2
  std::vector<int> cutoff_N;            // max(3, I / 2)
  std::vector<double> cutoff_norm_sq;   // |rho^N (x) v|^2
  std::vector<double> beyond_2N;        // sum_{|i| > 2N} v_i^2
  double total_norm_sq = 0.0;
  std::vector<std::string> warnings;
  LatticeState state;

  bool tail_nonincreasing() const;
  bool cutoff_dominates() const;
};

/// Tail masses of a given state (used directly and by run_tail_nullity).
TailReport tail_report(const LatticeState& v, const std::vector<int>& I_list, double t = 0.0);

/// Tail masses of v(tau, tau - t, theta_{-tau} w, v_{tau - t}).
TailReport run_tail_nullity(const ModelSpec& spec, const NoisePath& path, double tau, double t,
                            const std::vector<int>& I_list, const LatticeState& u_initial,
                            const SchemeConfig& scheme);

}  // namespace slch
