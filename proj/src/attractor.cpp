#include "slch/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "slch/error.hpp"
#include "slch/parallel.hpp"

namespace slch {

std::vector<InitialMember> default_initial_family(int window_radius, Boundary boundary,
                                                  const std::vector<double>& scales,
                                                  std::size_t gaussian_directions, std::uint64_t seed) {
  std::vector<LatticeState> dirs;
  std::vector<std::string> tags;
  {
    LatticeState flat = LatticeState::constant(window_radius, 1.0, boundary);
    flat *= 1.0 / norm(flat);
    dirs.push_back(std::move(flat));
    tags.push_back("flat");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t d = 0; d < gaussian_directions; ++d) {
    LatticeState g(window_radius, boundary);
    for (double& x : g.mutable_values()) x = normal(rng);
    g *= 1.0 / norm(g);
    dirs.push_back(std::move(g));
    tags.push_back("gauss" + std::to_string(d));
  }
  std::vector<InitialMember> out;
  for (double s : scales)
    for (std::size_t d = 0; d < dirs.size(); ++d) out.push_back({s, dirs[d], tags[d]});
  return out;
}

std::vector<double> AbsorptionExperiment::arrivals_at(std::size_t time_index) const {
  std::vector<double> out;
  for (const auto& c : cells)
    if (c.t == pullback_times[time_index]) out.push_back(c.arrival_norm);
  return out;
}

AbsorptionExperiment run_absorption(const ModelSpec& spec, const NoisePath& path, double tau,
                                    const std::vector<double>& pullback_times,
                                    const std::vector<InitialMember>& family, const SchemeConfig& scheme,
                                    double growth_power, unsigned workers) {
  if (pullback_times.empty() || family.empty()) throw ConfigError("absorption needs pullback times and a family");
  if (!std::is_sorted(pullback_times.begin(), pullback_times.end()) || pullback_times.front() <= 0.0)
    throw ConfigError("pullback times must be positive and increasing");
  // phi(t, tau - t, theta_{-t} w, .) runs on theta_{-tau} w over [tau - t, tau].
  const NoisePath P = shift_path(path, -tau);
  const OuSamples ou = ou_from_path(P);

  AbsorptionExperiment e;
  e.tau = tau;
  e.pullback_times = pullback_times;
  e.family = family;
  e.growth_power = growth_power;
  const std::size_t nf = family.size();
  e.cells.resize(pullback_times.size() * nf);
  std::vector<LatticeState> arrivals(e.cells.size());
  parallel_for(
      e.cells.size(),
      [&](std::size_t idx) {
        const double t = pullback_times[idx / nf];
        const auto& m = family[idx % nf];
        const double scale = m.scale * std::pow(1.0 + t, growth_power);
        const LatticeState u0 = scale * m.direction;
        const LatticeState v0 = u_to_v(spec, ou, tau - t, u0);
        const LatticeState v = advance(spec, ou, tau - t, tau, v0, scheme);
        LatticeState u = v_to_u(spec, ou, tau, v);
        AbsorptionCell& c = e.cells[idx];
        c.t = t;
        c.member = idx % nf;
        c.initial_norm = norm(u0);
        c.arrival_norm = norm(u);
        c.arrival_v_norm = norm(v);
        arrivals[idx] = std::move(u);
      },
      workers);
  for (std::size_t j = 0; j < pullback_times.size(); ++j) {
    double spread = 0.0;
    for (std::size_t a = 0; a < nf; ++a)
      for (std::size_t b = a + 1; b < nf; ++b)
        spread = std::max(spread, norm(arrivals[j * nf + a] - arrivals[j * nf + b]));
    e.endpoint_spread.push_back(spread);
  }
  summarize_absorption(e);
  return e;
}

void summarize_absorption(AbsorptionExperiment& e) {
  const std::size_t nt = e.pullback_times.size();
  std::vector<double> mx(nt, 0.0), mn(nt, 0.0);
  for (std::size_t j = 0; j < nt; ++j) {
    const auto a = e.arrivals_at(j);
    if (a.empty()) continue;
    mx[j] = *std::max_element(a.begin(), a.end());
    mn[j] = *std::min_element(a.begin(), a.end());
  }
  auto agrees = [&](std::size_t j) { return mx[j] < 1e-12 || (mn[j] > 0.0 && mx[j] / mn[j] <= 1.5); };
  e.T0.reset();
  for (std::size_t j = nt; j-- > 0;) {
    if (!agrees(j)) break;
    e.T0 = e.pullback_times[j];
  }
  const std::size_t top = std::min<std::size_t>(3, nt);
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (std::size_t j = nt - top; j < nt; ++j) {
    hi = std::max(hi, mx[j]);
    lo = std::min(lo, mx[j]);
  }
  e.stabilized = top > 0 && (hi <= 1e-6 || (hi - lo) <= 0.1 * hi);
}

RadiusEstimate absorbing_radius_estimate(const AbsorptionExperiment& e, const ModelSpec* spec,
                                         std::size_t profile_points) {
  RadiusEstimate r;
  const std::size_t nt = e.pullback_times.size();
  const std::size_t top = std::min<std::size_t>(3, nt);
  for (std::size_t j = nt - top; j < nt; ++j)
    for (double a : e.arrivals_at(j)) r.max_arrival = std::max(r.max_arrival, a);
  r.radius = 1.25 * r.max_arrival;
  r.conclusive = e.stabilized;
  if (spec && nt > 0 && profile_points > 1) {
    const double tmax = e.pullback_times.back();
    for (std::size_t i = 0; i < profile_points; ++i) {
      const double s = -tmax + tmax * static_cast<double>(i) / static_cast<double>(profile_points - 1);
      r.q1_profile.emplace_back(s, q1_profile(*spec, e.tau + s));
    }
  }
  return r;
}

std::vector<double> universe_weights(double lambda0, double scale, double growth_power,
                                     const std::vector<double>& pullback_times) {
  std::vector<double> w;
  for (double t : pullback_times) {
    const double n = scale * std::pow(1.0 + t, growth_power);
    w.push_back(std::exp(-lambda0 * t) * n * n);
  }
  return w;
}

bool universe_condition_holds(double lambda0, double growth_power) {
  return lambda0 > 0.0 && std::isfinite(growth_power);
}

bool TailReport::tail_nonincreasing() const {
  for (std::size_t j = 1; j < tail_mass.size(); ++j)
    if (I[j] >= I[j - 1] && tail_mass[j] > tail_mass[j - 1]) return false;
  return true;
}

bool TailReport::cutoff_dominates() const {
  for (std::size_t j = 0; j < cutoff_norm_sq.size(); ++j)
    if (cutoff_norm_sq[j] < beyond_2N[j]) return false;
  return true;
}

TailReport tail_report(const LatticeState& v, const std::vector<int>& I_list, double t) {
  TailReport rep;
  rep.t = t;
  rep.state = v;
  const int R = v.window_radius();
  const auto vals = v.values();
  rep.total_norm_sq = span_ops::sum_sq(vals);
  std::vector<int> Is = I_list;
  std::sort(Is.begin(), Is.end());
  // Suffix sums over |i| so every tail is a sum of the same nonnegative terms.
  std::vector<double> shell(static_cast<std::size_t>(R) + 2, 0.0);
  for (int i = -R; i <= R; ++i) shell[static_cast<std::size_t>(std::abs(i))] += vals[v.index_of(i)] * vals[v.index_of(i)];
  std::vector<double> beyond(static_cast<std::size_t>(R) + 2, 0.0);  // beyond[a] = sum_{|i| > a}
  for (int a = R - 1; a >= 0; --a) beyond[a] = beyond[a + 1] + shell[a + 1];
  auto tail = [&](int I) { return I >= R ? 0.0 : beyond[static_cast<std::size_t>(std::max(I, 0))]; };
  for (int I : Is) {
    if (I >= R) rep.warnings.push_back("I = " + std::to_string(I) + " beyond window; clipped to tail 0");
    rep.I.push_back(I);
    rep.tail_mass.push_back(tail(I));
    const int N = std::max(3, I / 2);
    const CutoffVector rho = make_cutoff(N, R, v.boundary());
    double s = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const double x = rho.values.values()[k] * vals[k];
      s += x * x;
    }
    rep.cutoff_N.push_back(N);
    rep.cutoff_norm_sq.push_back(s);
    rep.beyond_2N.push_back(tail(2 * N));
  }
  return rep;
}

TailReport run_tail_nullity(const ModelSpec& spec, const NoisePath& path, double tau, double t,
                            const std::vector<int>& I_list, const LatticeState& u_initial,
                            const SchemeConfig& scheme) {
  const NoisePath P = shift_path(path, -tau);
  const OuSamples ou = ou_from_path(P);
  const LatticeState v0 = u_to_v(spec, ou, tau - t, u_initial);
  const LatticeState v = advance(spec, ou, tau - t, tau, v0, scheme);
  return tail_report(v, I_list, t);
}

}  // namespace slch
