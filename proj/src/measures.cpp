#include "slch/measures.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <random>

#include "slch/error.hpp"
#include "slch/format.hpp"
#include "slch/parallel.hpp"

namespace slch {

namespace {

std::int64_t steps_of(double len, double stride, const char* what) {
  const double m = len / stride;
  const double mr = std::nearbyint(m);
  if (std::abs(m - mr) > 1e-9 * std::max(1.0, m))
    throw ConfigError(std::string(what) + " is not a multiple of the snapshot stride");
  return static_cast<std::int64_t>(mr);
}

}  // namespace

void EmpiricalMeasure::validate() const {
  if (atoms.empty()) throw ConfigError("empirical measure has no atoms");
  if (weights.size() != atoms.size()) throw ConfigError("weights and atoms differ in count");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("negative or NaN measure weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError("measure weights do not sum to 1");
  for (const auto& a : atoms) require_same_shape(atoms.front(), a, "measure atoms");
}

std::string EmpiricalMeasure::to_json() const {
  nlohmann::json j;
  j["anchor"] = {{"t", anchor.t}, {"start", anchor.start}, {"seed", anchor.seed}};
  j["window"] = window;
  j["stride"] = stride;
  j["averaging"] = averaging;
  j["thinned_from"] = thinned_from;
  j["weights"] = weights;
  j["starts"] = starts;
  auto& m = j["atoms"] = nlohmann::json::array();
  for (const auto& a : atoms) m.push_back(a.vector());
  if (!atoms.empty()) {
    j["window_radius"] = atoms.front().window_radius();
    j["boundary"] = boundary_name(atoms.front().boundary());
  }
  return j.dump();
}

double Observable::operator()(const LatticeState& u) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::ClippedNormSq: {
      const double n = norm(u);
      return std::min(n * n, clip);
    }
    case Kind::SiteProjection: {
      if (site < -u.window_radius() || site > u.window_radius()) throw ConfigError("observable site outside window");
      return std::clamp(u.at(site), -clip, clip);
    }
    case Kind::TanhSiteSum: {
      double s = 0.0;
      for (double x : u.values()) s += x;
      return std::tanh(s);
    }
  }
  return 0.0;
}

double Observable::sup_bound() const {
  switch (kind) {
    case Kind::Constant:
    case Kind::TanhSiteSum: return 1.0;
    case Kind::ClippedNormSq:
    case Kind::SiteProjection: return clip;
  }
  return 0.0;
}

std::string Observable::name() const {
  switch (kind) {
    case Kind::Constant: return "one";
    case Kind::ClippedNormSq: return "norm_sq_clip_" + fmt_double(clip);
    case Kind::SiteProjection: return "site_" + std::to_string(site) + "_clip_" + fmt_double(clip);
    case Kind::TanhSiteSum: return "tanh_site_sum";
  }
  return "?";
}

std::vector<Observable> default_observables(double clip) {
  using K = Observable::Kind;
  return {{K::Constant, 1.0, 0},
          {K::ClippedNormSq, clip, 0},
          {K::SiteProjection, clip, 0},
          {K::SiteProjection, clip, 1},
          {K::TanhSiteSum, 1.0, 0}};
}

EmpiricalMeasure build_measure_segment(const ModelSpec& spec, const NoisePath& path, double t, double start,
                                       double stride, const InitialSelection& xi,
                                       const MeasureBuildOptions& opt) {
  if (!(t > start)) throw ConfigError("measure window needs t > start");
  if (!(stride > 0.0)) throw ConfigError("snapshot stride must be > 0");
  require_same_shape(spec.f.alpha1, xi.value, "initial selection");
  steps_of(stride, path.dt(), "snapshot stride");
  const std::int64_t n = steps_of(t - start, stride, "measure window");
  (void)path.index_of(start);
  (void)path.index_of(t);
  const OuSamples ou = ou_from_path(path);

  EmpiricalMeasure mu;
  mu.window = t - start;
  mu.stride = stride;
  mu.anchor = {t, start, path.seed(), path.anchor()};
  const auto count = static_cast<std::size_t>(n);
  mu.atoms.resize(count);
  mu.starts.resize(count);
  parallel_for(
      count,
      [&](std::size_t j) {
        const double s = start + static_cast<double>(j) * stride;
        mu.starts[j] = s;
        mu.atoms[j] = solve_u(spec, ou, s, t, xi(s), opt.scheme);
      },
      opt.workers);

  if (opt.atom_cap > 0 && count > opt.atom_cap) {
    std::mt19937_64 rng(opt.thinning_seed);
    std::vector<std::size_t> keep(opt.atom_cap);
    for (std::size_t i = 0; i < opt.atom_cap; ++i) keep[i] = i;
    for (std::size_t i = opt.atom_cap; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, i);
      const std::size_t r = pick(rng);
      if (r < opt.atom_cap) keep[r] = i;
    }
    std::sort(keep.begin(), keep.end());
    std::vector<LatticeState> atoms;
    std::vector<double> starts;
    for (std::size_t i : keep) {
      atoms.push_back(std::move(mu.atoms[i]));
      starts.push_back(mu.starts[i]);
    }
    mu.atoms = std::move(atoms);
    mu.starts = std::move(starts);
    mu.thinned_from = count;
  }
  mu.weights.assign(mu.atoms.size(), 1.0 / static_cast<double>(mu.atoms.size()));
  return mu;
}

EmpiricalMeasure build_measure(const ModelSpec& spec, const NoisePath& path, double t, double tau,
                               double stride, const InitialSelection& xi, const MeasureBuildOptions& opt) {
  return build_measure_segment(spec, path, t, tau, stride, xi, opt);
}

double integrate_observable(const EmpiricalMeasure& mu, const Observable& obs) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.atoms.size(); ++j) s += mu.weights[j] * obs(mu.atoms[j]);
  return s;
}

EmpiricalMeasure mix(const EmpiricalMeasure& a, double wa, const EmpiricalMeasure& b, double wb) {
  if (a.anchor.t != b.anchor.t || a.anchor.seed != b.anchor.seed)
    throw ConfigError("mixing measures from different anchors");
  EmpiricalMeasure m;
  m.anchor = a.anchor;
  m.anchor.start = std::min(a.anchor.start, b.anchor.start);
  m.window = a.window + b.window;
  m.stride = a.stride;
  for (std::size_t j = 0; j < a.size(); ++j) {
    m.atoms.push_back(a.atoms[j]);
    m.weights.push_back(wa * a.weights[j]);
    m.starts.push_back(a.starts[j]);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    m.atoms.push_back(b.atoms[j]);
    m.weights.push_back(wb * b.weights[j]);
    m.starts.push_back(b.starts[j]);
  }
  return m;
}

std::vector<InvarianceRow> invariance_residual(const ModelSpec& spec, const NoisePath& path,
                                               const EmpiricalMeasure& mu_at_tau,
                                               const EmpiricalMeasure& mu_later, double t_step,
                                               const std::vector<Observable>& obs, const SchemeConfig& scheme) {
  if (!(t_step >= 0.0)) throw ConfigError("t_step must be >= 0");
  const auto& a = mu_at_tau.anchor;
  const auto& b = mu_later.anchor;
  if (a.seed != path.seed() || b.seed != path.seed() || a.path_anchor != path.anchor() ||
      b.path_anchor != path.anchor())
    throw ConfigError("measure anchors do not match the path");
  if (std::abs(b.t - (a.t + t_step)) > 1e-9 * std::max(1.0, std::abs(b.t)))
    throw ConfigError("later measure is not anchored at tau + t_step");
  if (std::abs(mu_at_tau.window - mu_later.window) > 1e-9 || std::abs(mu_at_tau.stride - mu_later.stride) > 1e-12)
    throw ConfigError("measures use different windows or strides");

  const double tau = a.t;
  std::vector<LatticeState> pushed(mu_at_tau.size());
  if (t_step == 0.0) {
    pushed = mu_at_tau.atoms;
  } else {
    const OuSamples ou = ou_from_path(path);
    parallel_for(mu_at_tau.size(), [&](std::size_t j) {
      pushed[j] = solve_u(spec, ou, tau, tau + t_step, mu_at_tau.atoms[j], scheme);
    });
  }
  std::vector<InvarianceRow> rows;
  for (const auto& o : obs) {
    InvarianceRow r;
    r.observable = o.name();
    r.lhs = integrate_observable(mu_later, o);
    double s = 0.0;
    for (std::size_t j = 0; j < pushed.size(); ++j) s += mu_at_tau.weights[j] * o(pushed[j]);
    r.pushed = s;
    r.residual = std::abs(r.lhs - r.pushed);
    rows.push_back(r);
  }
  return rows;
}

std::vector<InvarianceRow> invariance_study(const ModelSpec& spec, const NoisePath& path, double tau,
                                            double window, double stride, double t_step,
                                            const InitialSelection& xi, const std::vector<Observable>& obs,
                                            const MeasureBuildOptions& opt) {
  const EmpiricalMeasure m0 = build_measure(spec, path, tau, tau - window, stride, xi, opt);
  if (t_step == 0.0) return invariance_residual(spec, path, m0, m0, 0.0, obs, opt.scheme);
  const EmpiricalMeasure m1 = build_measure(spec, path, tau + t_step, tau + t_step - window, stride, xi, opt);
  return invariance_residual(spec, path, m0, m1, t_step, obs, opt.scheme);
}

}  // namespace slch
