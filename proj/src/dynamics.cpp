#include "slch/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "drift_kernel.hpp"
#include "slch/error.hpp"
#include "slch/format.hpp"

namespace slch {

std::string_view scheme_name(Scheme s) noexcept {
  switch (s) {
    case Scheme::ExplicitEuler: return "explicit_euler";
    case Scheme::RK4: return "rk4";
    case Scheme::ImexSplit: return "imex_split";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "explicit_euler") return Scheme::ExplicitEuler;
  if (name == "rk4") return Scheme::RK4;
  if (name == "imex_split") return Scheme::ImexSplit;
  throw ConfigError("unknown scheme: " + std::string(name));
}

std::string_view frame_name(Frame f) noexcept { return f == Frame::VFrame ? "v" : "u"; }

namespace {

void require_regime(const ModelSpec& spec, bool want_positive, const char* what) {
  if (want_positive && !(spec.k > 0.0))
    throw WrongRegimeError(std::string(what) + " needs k > 0 (got k = " + fmt_double(spec.k) + ")");
  if (!want_positive && spec.k != 0.0)
    throw WrongRegimeError(std::string(what) + " needs k = 0 (got k = " + fmt_double(spec.k) + ")");
}

}  // namespace

DriftTerms drift_k_pos_terms(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v) {
  require_regime(spec, true, "drift_k_pos");
  require_same_shape(spec.f.alpha1, v, "drift_k_pos");
  const double k = spec.k;
  const double z = ou.at(t);
  const double emkz = std::exp(-k * z);
  auto [h, hp] = eval_h(spec, t);
  double lin = k * z - spec.lambda;
  if (spec.calculus == Calculus::Ito) lin -= 0.5 * k * k;
  DriftTerms d;
  d.F1 = lin * v - apply_A2(v);
  const LatticeState w = std::exp(k * z) * v - (1.0 / k) * h;
  d.F2 = emkz * (eval_g(spec, t, w) - apply_A(eval_f(spec, w)));
  d.F3 = ((1.0 / k) * emkz) * (apply_A2(h) + spec.lambda * h + hp);
  return d;
}

LatticeState drift_k_pos(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v) {
  return drift_k_pos_terms(spec, t, ou, v).total();
}

DriftTerms drift_k_zero_terms(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v) {
  require_regime(spec, false, "drift_k_zero");
  require_same_shape(spec.f.alpha1, v, "drift_k_zero");
  const double z = ou.at(t);
  auto [h, hp] = eval_h(spec, t);
  DriftTerms d;
  d.F1 = -1.0 * apply_A2(v) - spec.lambda * v;
  const LatticeState w = v + z * h;
  d.F2 = eval_g(spec, t, w) - apply_A(eval_f(spec, w));
  d.F3 = z * ((1.0 - spec.lambda) * h - apply_A2(h) - hp);
  return d;
}

LatticeState drift_k_zero(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v) {
  return drift_k_zero_terms(spec, t, ou, v).total();
}

LatticeState drift(const ModelSpec& spec, double t, const OuSamples& ou, const LatticeState& v) {
  return spec.k > 0.0 ? drift_k_pos(spec, t, ou, v) : drift_k_zero(spec, t, ou, v);
}

LatticeState v_to_u(const ModelSpec& spec, const OuSamples& ou, double t, const LatticeState& v) {
  require_same_shape(spec.h.c, v, "v_to_u");
  const double z = ou.at(t);
  LatticeState h = eval_h(spec, t).first;
  LatticeState u(v.window_radius(), v.boundary());
  auto out = u.mutable_values();
  const auto vv = v.values();
  const auto hv = h.values();
  if (spec.k > 0.0) {
    const double ekz = std::exp(spec.k * z);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ekz * vv[i] - hv[i] / spec.k;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = vv[i] + z * hv[i];
  }
  return u;
}

LatticeState u_to_v(const ModelSpec& spec, const OuSamples& ou, double t, const LatticeState& u) {
  require_same_shape(spec.h.c, u, "u_to_v");
  const double z = ou.at(t);
  LatticeState h = eval_h(spec, t).first;
  LatticeState v(u.window_radius(), u.boundary());
  auto out = v.mutable_values();
  const auto uv = u.values();
  const auto hv = h.values();
  if (spec.k > 0.0) {
    const double emkz = std::exp(-spec.k * z);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = emkz * (uv[i] + hv[i] / spec.k);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = uv[i] - z * hv[i];
  }
  return v;
}

LatticeState ito_drift(const ModelSpec& spec, double t, const LatticeState& u) {
  require_same_shape(spec.f.alpha1, u, "ito_drift");
  detail::DriftKernel kern(spec);
  LatticeState out(u.window_radius(), u.boundary());
  kern.ito(t, u.values(), out.mutable_values());
  return out;
}

LatticeState diffusion(const ModelSpec& spec, double t, const LatticeState& u) {
  require_same_shape(spec.f.alpha1, u, "diffusion");
  detail::DriftKernel kern(spec);
  LatticeState out(u.window_radius(), u.boundary());
  kern.diffusion(t, u.values(), out.mutable_values());
  return out;
}

Trajectory euler_maruyama(const ModelSpec& spec, const NoisePath& path, double tau, double T,
                          const LatticeState& u_tau, double dt, std::size_t record_stride) {
  require_same_shape(spec.f.alpha1, u_tau, "euler_maruyama");
  if (!(T >= tau)) throw ConfigError("euler_maruyama needs T >= tau");
  const double ratio = dt / path.dt();
  const double mr = std::nearbyint(ratio);
  if (mr < 1.0 || std::abs(ratio - mr) > 1e-9 * ratio)
    throw ConfigError("scheme dt must be a positive multiple of the path dt");
  const auto m = static_cast<std::size_t>(mr);
  const std::size_t n0 = path.index_of(tau);
  const std::size_t n1 = path.index_of(T);
  if ((n1 - n0) % m != 0) throw ConfigError("[tau, T] is not tiled by the scheme step");
  if (record_stride == 0) record_stride = 1;
  const double h = static_cast<double>(m) * path.dt();

  detail::DriftKernel kern(spec);
  const std::size_t n = u_tau.size();
  std::vector<double> u(u_tau.values().begin(), u_tau.values().end()), f(n), g(n);

  Trajectory tr;
  tr.frame = Frame::UFrame;
  tr.dt = h;
  tr.provenance = {path.seed(), spec.hash(), "euler_maruyama"};
  auto record = [&](std::size_t node) {
    tr.times.push_back(path.time_at(node));
    tr.path_nodes.push_back(node);
    tr.states.emplace_back(u_tau.window_radius(), u_tau.boundary(), u);
  };
  record(n0);
  std::vector<double> history;
  std::size_t step = 0;
  for (std::size_t node = n0; node < n1; node += m) {
    const double t = path.time_at(node);
    kern.ito(t, u, f);
    kern.diffusion(t, u, g);
    const double dw = path.increment_between(node, node + m);
    for (std::size_t i = 0; i < n; ++i) u[i] = (u[i] + h * f[i]) + g[i] * dw;
    const double sup = span_ops::max_abs(u);
    history.push_back(sup);
    if (history.size() > 64) history.erase(history.begin());
    if (!(sup <= 1e8)) {
      throw BlowUpError("Euler-Maruyama state exceeded 1e8 or became non-finite at t = " +
                            fmt_double(path.time_at(node + m)),
                        t, history);
    }
    ++step;
    if (step % record_stride == 0 || node + m == n1) record(node + m);
  }
  return tr;
}

LatticeState solve_u(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& u_tau, const SchemeConfig& scheme) {
  const LatticeState v = u_to_v(spec, ou, tau, u_tau);
  return v_to_u(spec, ou, T, advance(spec, ou, tau, T, v, scheme));
}

LatticeState cocycle(const ModelSpec& spec, double t, double tau, const NoisePath& path,
                     const LatticeState& u_tau, const SchemeConfig& scheme) {
  if (!(t >= 0.0)) throw ConfigError("cocycle needs t >= 0");
  const NoisePath shifted = shift_path(path, -tau);
  if (t == 0.0) return u_tau;
  const OuSamples ou = ou_from_path(shifted);
  return solve_u(spec, ou, tau, tau + t, u_tau, scheme);
}

std::vector<EnergyStep> energy_profile(const ModelSpec& spec, const OuSamples& ou, const Trajectory& traj) {
  if (traj.frame != Frame::VFrame) throw ConfigError("energy profile needs a v-frame trajectory");
  std::vector<EnergyStep> out;
  for (std::size_t j = 0; j + 1 < traj.states.size(); ++j) {
    const double t = traj.times[j];
    const double dt = traj.times[j + 1] - t;
    const double z = ou.at(t);
    const double a = norm(traj.states[j]);
    const double b = norm(traj.states[j + 1]);
    EnergyStep s;
    s.t = t;
    s.quotient = (b * b - a * a) / dt + (spec.lambda - 2.0 * spec.k * z) * a * a;
    s.weight = std::exp(-2.0 * spec.k * z) * q1_profile(spec, t);
    out.push_back(s);
  }
  return out;
}

double calibrate_energy_constant(const std::vector<EnergyStep>& steps) {
  double c = 0.0;
  for (const auto& s : steps)
    if (s.weight > 0.0) c = std::max(c, s.quotient / s.weight);
  return c;
}

double energy_fraction_satisfied(const std::vector<EnergyStep>& steps, double c) {
  if (steps.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& s : steps)
    if (s.quotient <= c * s.weight) ++ok;
  return static_cast<double>(ok) / static_cast<double>(steps.size());
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "# seed=" << traj.provenance.seed << ", spec=" << traj.provenance.spec_hash
     << ", scheme=" << traj.provenance.scheme << ", frame=" << frame_name(traj.frame)
     << ", dt=" << fmt_double(traj.dt) << '\n';
  if (traj.states.empty()) return;
  const int r = traj.states.front().window_radius();
  os << 't';
  for (int i = -r; i <= r; ++i) os << ",site_" << i;
  os << '\n';
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    os << fmt_double(traj.times[j]);
    for (double v : traj.states[j].values()) os << ',' << fmt_double(v);
    os << '\n';
  }
}

}  // namespace slch
