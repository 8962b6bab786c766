#include "slch/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "slch/attractor.hpp"
#include "slch/format.hpp"
#include "slch/liouville.hpp"
#include "slch/measures.hpp"
#include "slch/noise.hpp"

namespace slch {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// Reads the keys of one JSON object and rejects anything left over.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

bool is_multiple(double len, double unit) {
  const double m = len / unit;
  return std::abs(m - std::nearbyint(m)) <= 1e-9 * std::max(1.0, std::abs(m)) && std::nearbyint(m) >= 1.0;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be finite and > 0");
}

json canonical_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["model"] = json::parse(model_to_json(c.model));
  j["model"].erase("window_radius");
  j["model"].erase("boundary");
  j["lattice"] = {{"N_lat", c.model.window_radius()}, {"boundary", boundary_name(c.model.boundary())}};
  j["noise"] = {{"seeds", c.noise.seeds},
                {"dt", c.noise.dt},
                {"t_min", c.noise.t_min},
                {"t_max", c.noise.t_max},
                {"burn_in", c.noise.burn_in}};
  j["scheme"] = {{"name", scheme_name(c.scheme.scheme)},
                 {"dt", c.scheme.dt},
                 {"blowup_threshold", c.scheme.blowup_threshold}};
  j["audit"] = {{"samples", c.audit.samples}, {"radius", c.audit.radius}, {"seed", c.audit.seed}};
  j["simulate"] = {{"tau", c.simulate.tau},
                   {"T", c.simulate.T},
                   {"initial_scale", c.simulate.initial_scale},
                   {"record_stride", c.simulate.record_stride}};
  j["absorb"] = {{"tau", c.absorb.tau},
                 {"pullback_times", c.absorb.pullback_times},
                 {"scales", c.absorb.scales},
                 {"gaussian_directions", c.absorb.gaussian_directions},
                 {"growth_power", c.absorb.growth_power},
                 {"zero_forcing_control", c.absorb.zero_forcing_control},
                 {"dt", c.absorb.dt}};
  j["tails"] = {{"tau", c.tails.tau}, {"t", c.tails.t}, {"I", c.tails.I}, {"initial_scale", c.tails.initial_scale}};
  j["measure"] = {{"tau", c.measure.tau},
                  {"windows", c.measure.windows},
                  {"stride", c.measure.stride},
                  {"t_step", c.measure.t_step},
                  {"clip", c.measure.clip},
                  {"atom_cap", c.measure.atom_cap}};
  json ladder = json::array();
  for (const auto& r : c.liouville.ladder) ladder.push_back({{"window", r.window}, {"dt", r.dt}});
  j["liouville"] = {{"s", c.liouville.s},
                    {"t", c.liouville.t},
                    {"ladder", ladder},
                    {"start_spacing", c.liouville.start_spacing},
                    {"radius", c.liouville.radius},
                    {"tolerance", c.liouville.tolerance},
                    {"ito_T", c.liouville.ito_T},
                    {"ito_dts", c.liouville.ito_dts}};
  j["workers"] = c.workers;
  return j;
}

bool runs(Mode m, Mode which) { return m == which || m == Mode::FullSuite; }

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

std::string f(double x) { return fmt_double(x); }
template <class I>
std::string n(I x) {
  return std::to_string(x);
}

LatticeState flat_unit(int R, Boundary b) {
  LatticeState u = LatticeState::constant(R, 1.0, b);
  u *= 1.0 / norm(u);
  return u;
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
  void put(const std::string& name, const std::string& contents) {
    write_atomic(dir_ / name, contents);
    files_.push_back(name);
    hashes_.push_back({name, contents});
  }
  const std::vector<std::string>& files() const { return files_; }
  json manifest_files() const {
    json a = json::array();
    for (const auto& [name, c] : hashes_)
      a.push_back({{"name", name}, {"bytes", c.size()}, {"fnv1a64", hex64(fnv1a64(c))}});
    return a;
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::pair<std::string, std::string>> hashes_;
};

NoisePath path_for(const ExperimentConfig& c, std::uint64_t seed) {
  return NoisePath::sample(seed, c.noise.t_min, c.noise.t_max, c.noise.dt);
}

void run_audit(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const AuditReport rep = hypothesis_audit(c.model, c.audit.samples, c.audit.radius, c.audit.seed);
  std::string csv = "hypothesis,check,worst_margin,passed,note\n";
  for (const auto& e : rep.entries)
    csv += csv_row({e.hypothesis, e.check, f(e.worst_margin), e.passed ? "1" : "0", e.note});
  w.put("audit.json", rep.to_json() + "\n");
  w.put("audit.csv", csv);
  sum.checks["audit"] = rep.all_passed() ? "all checks passed" : "some checks failed";
}

void run_simulate(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const auto& s = c.simulate;
  for (auto seed : c.noise.seeds) {
    const NoisePath path = path_for(c, seed);
    const OuSamples ou = ou_from_path(path, c.noise.burn_in);
    SchemeConfig sc = c.scheme;
    sc.record_stride = s.record_stride;
    const LatticeState u0 = s.initial_scale * flat_unit(c.model.window_radius(), c.model.boundary());
    Trajectory tr = integrate(c.model, path, ou, s.tau, s.tau + s.T, u_to_v(c.model, ou, s.tau, u0), sc);
    for (std::size_t j = 0; j < tr.states.size(); ++j) tr.states[j] = v_to_u(c.model, ou, tr.times[j], tr.states[j]);
    tr.frame = Frame::UFrame;
    tr.provenance = {seed, c.model.hash(), std::string(scheme_name(sc.scheme))};
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    w.put("simulate_seed" + n(seed) + ".csv", os.str());
    sum.checks["simulate seed " + n(seed)] = "final |u| = " + f(norm(tr.final_state()));
  }
}

void run_absorb(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const auto& a = c.absorb;
  const int R = c.model.window_radius();
  const Boundary b = c.model.boundary();
  const auto family = default_initial_family(R, b, a.scales, a.gaussian_directions, 0);
  ModelSpec zero = c.model;
  zero.g.forcing_profile.amplitude = 0.0;
  zero.h.profile.amplitude = 0.0;
  zero.realize(R, b);
  SchemeConfig sc = c.scheme;
  if (a.dt > 0.0) sc.dt = a.dt;

  std::string cells = "seed,pullback_time,member,tag,scale,initial_norm,arrival_norm,arrival_v_norm\n";
  std::string summary = "seed,T0,stabilized,max_arrival,radius,zero_forcing_max_arrival\n";
  for (auto seed : c.noise.seeds) {
    const NoisePath path = path_for(c, seed);
    const auto e = run_absorption(c.model, path, a.tau, a.pullback_times, family, sc, a.growth_power, c.workers);
    for (const auto& cell : e.cells)
      cells += csv_row({n(seed), f(cell.t), n(cell.member), family[cell.member].tag, f(family[cell.member].scale),
                        f(cell.initial_norm), f(cell.arrival_norm), f(cell.arrival_v_norm)});
    const auto r = absorbing_radius_estimate(e, nullptr, 0);
    double zmax = std::nan("");
    if (a.zero_forcing_control) {
      const std::vector<double> last{a.pullback_times.back()};
      const auto ez = run_absorption(zero, path, a.tau, last, family, sc, a.growth_power, c.workers);
      zmax = 0.0;
      for (double x : ez.arrivals_at(0)) zmax = std::max(zmax, x);
    }
    summary += csv_row({n(seed), e.T0 ? f(*e.T0) : "nan", e.stabilized ? "1" : "0", f(r.max_arrival), f(r.radius),
                        f(zmax)});
    sum.checks["absorb seed " + n(seed)] =
        std::string(e.T0 ? "T0 = " + f(*e.T0) : "no T0") + (e.stabilized ? ", stabilized" : ", not stabilized");
  }
  w.put("absorption.csv", cells);
  w.put("absorption_summary.csv", summary);
}

void run_tails(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const auto& t = c.tails;
  const LatticeState u0 = t.initial_scale * flat_unit(c.model.window_radius(), c.model.boundary());
  std::string csv = "seed,I,tail_mass,total_norm_sq,relative_tail,cutoff_N,cutoff_norm_sq,beyond_2N\n";
  std::size_t monotone = 0;
  for (auto seed : c.noise.seeds) {
    const NoisePath path = path_for(c, seed);
    const TailReport rep = run_tail_nullity(c.model, path, t.tau, t.t, t.I, u0, c.scheme);
    for (std::size_t j = 0; j < rep.I.size(); ++j)
      csv += csv_row({n(seed), n(rep.I[j]), f(rep.tail_mass[j]), f(rep.total_norm_sq),
                      f(rep.total_norm_sq > 0.0 ? rep.tail_mass[j] / rep.total_norm_sq : 0.0), n(rep.cutoff_N[j]),
                      f(rep.cutoff_norm_sq[j]), f(rep.beyond_2N[j])});
    if (rep.tail_nonincreasing()) ++monotone;
  }
  w.put("tails.csv", csv);
  sum.checks["tails"] = n(monotone) + "/" + n(c.noise.seeds.size()) + " reports nonincreasing in I";
}

void run_measure(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const auto& m = c.measure;
  MeasureBuildOptions opt;
  opt.scheme = c.scheme;
  opt.atom_cap = m.atom_cap;
  opt.workers = c.workers;
  const auto obs = default_observables(m.clip);
  const auto xi = InitialSelection::constant(LatticeState(c.model.window_radius(), c.model.boundary()));
  std::string csv = "seed,window,t_step,observable,lhs,pushed,residual\n";
  for (auto seed : c.noise.seeds) {
    const NoisePath path = path_for(c, seed);
    for (double W : m.windows) {
      const auto rows = invariance_study(c.model, path, m.tau, W, m.stride, m.t_step, xi, obs, opt);
      for (const auto& r : rows)
        csv += csv_row({n(seed), f(W), f(m.t_step), r.observable, f(r.lhs), f(r.pushed), f(r.residual)});
    }
  }
  w.put("invariance.csv", csv);
  sum.checks["measure"] = n(c.noise.seeds.size() * m.windows.size()) + " invariance studies";
}

void run_liouville(const ExperimentConfig& c, Writer& w, RunSummary& sum) {
  const auto& L = c.liouville;
  const int R = c.model.window_radius();
  const Boundary b = c.model.boundary();
  const auto tfs = default_test_functions(R, b, L.radius);
  std::string csv = "seed,test_function,s,t,window,dt,residual,relative,bracket,drift,stochastic,correction\n";
  std::string stat =
      "seed,window,dt,test_function,continuity_modulus,continuity_envelope,continuity_ok,drift_sup,diffusion_sup,"
      "integrability_ok,bound_ok,liouville_ok\n";
  std::string ito = "seed,test_function,dt,residual,abs_residual,bracket,drift,stochastic,correction\n";
  std::size_t fine_ok = 0, fine_total = 0;
  for (auto seed : c.noise.seeds) {
    const NoisePath path = path_for(c, seed);
    for (std::size_t r = 0; r < L.ladder.size(); ++r) {
      LiouvilleConfig lc;
      lc.s = L.s;
      lc.t = L.t;
      lc.window = L.ladder[r].window;
      lc.start_spacing = L.start_spacing;
      lc.scheme = c.scheme;
      lc.scheme.dt = L.ladder[r].dt;
      lc.xi = InitialSelection::constant(LatticeState(R, b));
      lc.workers = c.workers;
      const MeasureSeries ser = liouville_series(c.model, path, lc, tfs);
      const auto rep = statistical_solution_checks(ser, L.tolerance);
      for (const auto& e : rep.entries) {
        const auto& q = e.liouville;
        csv += csv_row({n(seed), q.test_function, f(q.s), f(q.t), f(lc.window), f(lc.scheme.dt), f(q.residual),
                        f(q.relative), f(q.bracket), f(q.drift), f(q.stochastic), f(q.correction)});
        stat += csv_row({n(seed), f(lc.window), f(lc.scheme.dt), e.test_function, f(e.continuity_modulus),
                         f(e.continuity_envelope), e.continuity_ok ? "1" : "0", f(e.drift_sup), f(e.diffusion_sup),
                         e.integrability_ok ? "1" : "0", e.bound_ok ? "1" : "0", e.liouville_ok ? "1" : "0"});
        if (r + 1 == L.ladder.size()) {
          ++fine_total;
          if (e.liouville_ok) ++fine_ok;
        }
      }
    }
    const LatticeState u0 = flat_unit(R, b);
    for (double dt : L.ito_dts) {
      const Trajectory tr = euler_maruyama(c.model, path, L.s, L.s + L.ito_T, u0, dt, 1);
      for (const auto& tf : tfs) {
        const ItoTerms it = ito_residual(c.model, path, tr, tf, L.s, L.s + L.ito_T);
        ito += csv_row({n(seed), tf.name(), f(dt), f(it.residual), f(std::abs(it.residual)), f(it.bracket),
                        f(it.drift), f(it.stochastic), f(it.correction)});
      }
    }
  }
  w.put("liouville.csv", csv);
  w.put("statsol.csv", stat);
  w.put("ito.csv", ito);
  sum.checks["liouville"] = n(fine_ok) + "/" + n(fine_total) + " finest-rung residuals within tolerance";
}

}  // namespace

std::string_view mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::Audit: return "audit";
    case Mode::Simulate: return "simulate";
    case Mode::Absorb: return "absorb";
    case Mode::Tails: return "tails";
    case Mode::Measure: return "measure";
    case Mode::Liouville: return "liouville";
    case Mode::FullSuite: return "full-suite";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::Audit, Mode::Simulate, Mode::Absorb, Mode::Tails, Mode::Measure, Mode::Liouville,
                 Mode::FullSuite})
    if (mode_name(m) == name) return m;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "config");

  std::string mode;
  top.get("mode", mode);
  if (mode.empty()) throw ConfigError("config needs a 'mode'");
  c.mode = parse_mode(mode);

  int n_lat = 16;
  std::string boundary = "zero_pad";
  if (const json* l = top.sub("lattice")) {
    Section s(*l, "lattice");
    s.get("N_lat", n_lat);
    s.get("boundary", boundary);
    s.finish();
  }
  if (n_lat < 1) throw ConfigError("lattice.N_lat must be >= 1");
  json model = json::object();
  if (const json* m = top.sub("model")) {
    if (!m->is_object()) throw ConfigError("'model' must be an object");
    model = *m;
  }
  if (model.contains("window_radius") || model.contains("boundary"))
    throw ConfigError("lattice size and boundary belong in the 'lattice' block");
  model["window_radius"] = n_lat;
  model["boundary"] = boundary;
  c.model = model_from_json(model.dump());

  if (const json* j = top.sub("noise")) {
    Section s(*j, "noise");
    s.get("seeds", c.noise.seeds);
    s.get("dt", c.noise.dt);
    s.get("t_min", c.noise.t_min);
    s.get("t_max", c.noise.t_max);
    s.get("burn_in", c.noise.burn_in);
    s.finish();
  }
  if (const json* j = top.sub("scheme")) {
    Section s(*j, "scheme");
    std::string name(scheme_name(c.scheme.scheme));
    s.get("name", name);
    c.scheme.scheme = parse_scheme(name);
    s.get("dt", c.scheme.dt);
    s.get("blowup_threshold", c.scheme.blowup_threshold);
    s.finish();
  }
  if (const json* j = top.sub("audit")) {
    Section s(*j, "audit");
    s.get("samples", c.audit.samples);
    s.get("radius", c.audit.radius);
    s.get("seed", c.audit.seed);
    s.finish();
  }
  if (const json* j = top.sub("simulate")) {
    Section s(*j, "simulate");
    s.get("tau", c.simulate.tau);
    s.get("T", c.simulate.T);
    s.get("initial_scale", c.simulate.initial_scale);
    s.get("record_stride", c.simulate.record_stride);
    s.finish();
  }
  if (const json* j = top.sub("absorb")) {
    Section s(*j, "absorb");
    s.get("tau", c.absorb.tau);
    s.get("pullback_times", c.absorb.pullback_times);
    s.get("scales", c.absorb.scales);
    s.get("gaussian_directions", c.absorb.gaussian_directions);
    s.get("growth_power", c.absorb.growth_power);
    s.get("zero_forcing_control", c.absorb.zero_forcing_control);
    s.get("dt", c.absorb.dt);
    s.finish();
  }
  if (const json* j = top.sub("tails")) {
    Section s(*j, "tails");
    s.get("tau", c.tails.tau);
    s.get("t", c.tails.t);
    s.get("I", c.tails.I);
    s.get("initial_scale", c.tails.initial_scale);
    s.finish();
  }
  if (const json* j = top.sub("measure")) {
    Section s(*j, "measure");
    s.get("tau", c.measure.tau);
    s.get("windows", c.measure.windows);
    s.get("stride", c.measure.stride);
    s.get("t_step", c.measure.t_step);
    s.get("clip", c.measure.clip);
    s.get("atom_cap", c.measure.atom_cap);
    s.finish();
  }
  if (const json* j = top.sub("liouville")) {
    Section s(*j, "liouville");
    s.get("s", c.liouville.s);
    s.get("t", c.liouville.t);
    if (const json* lad = s.sub("ladder")) {
      if (!lad->is_array() || lad->empty()) throw ConfigError("'liouville.ladder' must be a nonempty array");
      c.liouville.ladder.clear();
      for (const auto& r : *lad) {
        Section rs(r, "liouville.ladder[]");
        LadderRung rung{0.0, 0.0};
        rs.get("window", rung.window);
        rs.get("dt", rung.dt);
        rs.finish();
        c.liouville.ladder.push_back(rung);
      }
    }
    s.get("start_spacing", c.liouville.start_spacing);
    s.get("radius", c.liouville.radius);
    s.get("tolerance", c.liouville.tolerance);
    s.get("ito_T", c.liouville.ito_T);
    s.get("ito_dts", c.liouville.ito_dts);
    s.finish();
  }
  top.get("output_dir", c.output_dir);
  top.get("workers", c.workers);
  top.finish();

  if (const char* env = std::getenv("SLCH_OUTPUT_DIR"); env && *env) c.output_dir = env;
  c.canonical = canonical_json(c).dump(2);
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::validate() const {
  model.validate();
  require_positive(noise.dt, "noise.dt");
  require_positive(scheme.dt, "scheme.dt");
  require_positive(scheme.blowup_threshold, "scheme.blowup_threshold");
  if (noise.seeds.empty()) throw ConfigError("noise.seeds must list at least one seed");
  if (!(noise.t_min < 0.0 && noise.t_max > 0.0)) throw ConfigError("noise span must contain 0");
  if (!(noise.burn_in >= 0.0)) throw ConfigError("noise.burn_in must be >= 0");
  if (!is_multiple(scheme.dt, noise.dt)) throw ConfigError("scheme.dt is not a multiple of noise.dt");
  const double lo = noise.t_min + noise.burn_in;
  const double hi = noise.t_max;
  if (!(lo < 0.0)) throw SpanError("burn-in swallows the past half of the path", noise.t_min, 0.0);
  auto inside = [&](double a, double b, const std::string& what, double alo, double ahi) {
    if (a < lo - 1e-12 || b > hi + 1e-12) throw SpanError(what + " leaves the noise span", alo, ahi);
  };
  auto shift_ok = [&](double tau, const std::string& what) {
    if (!(-tau > noise.t_min && -tau < noise.t_max)) throw SpanError(what + " shift leaves the noise span", -noise.t_max, -noise.t_min);
  };

  if (runs(mode, Mode::Audit)) {
    if (audit.samples == 0) throw ConfigError("audit.samples must be > 0");
    require_positive(audit.radius, "audit.radius");
  }
  if (runs(mode, Mode::Simulate)) {
    require_positive(simulate.T, "simulate.T");
    if (simulate.record_stride == 0) throw ConfigError("simulate.record_stride must be >= 1");
    inside(simulate.tau, simulate.tau + simulate.T, "simulation window", lo, hi - simulate.T);
  }
  if (runs(mode, Mode::Absorb)) {
    if (absorb.pullback_times.empty() || absorb.scales.empty())
      throw ConfigError("absorb needs pullback_times and scales");
    for (double t : absorb.pullback_times) require_positive(t, "absorb.pullback_times");
    for (double s : absorb.scales) require_positive(s, "absorb.scales");
    if (!std::is_sorted(absorb.pullback_times.begin(), absorb.pullback_times.end()))
      throw ConfigError("absorb.pullback_times must be increasing");
    if (absorb.dt < 0.0) throw ConfigError("absorb.dt must be >= 0");
    if (absorb.dt > 0.0 && !is_multiple(absorb.dt, noise.dt)) throw ConfigError("absorb.dt is not a multiple of noise.dt");
    shift_ok(absorb.tau, "absorb.tau");
    if (absorb.pullback_times.back() > -lo + 1e-12)
      throw SpanError("largest pullback time leaves the noise span", 0.0, -lo);
  }
  if (runs(mode, Mode::Tails)) {
    require_positive(tails.t, "tails.t");
    if (tails.I.empty()) throw ConfigError("tails.I must list at least one index");
    shift_ok(tails.tau, "tails.tau");
    if (tails.t > -lo + 1e-12) throw SpanError("tails.t leaves the noise span", 0.0, -lo);
  }
  if (runs(mode, Mode::Measure)) {
    if (measure.windows.empty()) throw ConfigError("measure.windows must be nonempty");
    require_positive(measure.stride, "measure.stride");
    if (!is_multiple(measure.stride, noise.dt)) throw ConfigError("measure.stride is not a multiple of noise.dt");
    if (!(measure.t_step >= 0.0)) throw ConfigError("measure.t_step must be >= 0");
    require_positive(measure.clip, "measure.clip");
    for (double W : measure.windows) {
      require_positive(W, "measure.windows");
      if (!is_multiple(W, measure.stride)) throw ConfigError("measure window is not a multiple of the stride");
      inside(measure.tau - W, measure.tau + measure.t_step, "measure window", lo + W, hi - measure.t_step);
    }
  }
  if (runs(mode, Mode::Liouville)) {
    const auto& L = liouville;
    if (!(L.t > L.s)) throw ConfigError("liouville needs t > s");
    require_positive(L.start_spacing, "liouville.start_spacing");
    require_positive(L.radius, "liouville.radius");
    require_positive(L.tolerance, "liouville.tolerance");
    require_positive(L.ito_T, "liouville.ito_T");
    for (const auto& r : L.ladder) {
      require_positive(r.window, "liouville.ladder.window");
      require_positive(r.dt, "liouville.ladder.dt");
      if (!is_multiple(r.dt, noise.dt)) throw ConfigError("liouville ladder dt is not a multiple of noise.dt");
      if (!is_multiple(r.window, L.start_spacing))
        throw ConfigError("liouville window is not a multiple of the start spacing");
      if (!is_multiple(L.start_spacing, r.dt)) throw ConfigError("liouville start spacing is not a multiple of dt");
      if (!is_multiple(L.t - L.s, r.dt)) throw ConfigError("liouville t - s is not a multiple of dt");
      inside(L.s - r.window, L.t, "liouville window", lo + r.window, hi);
    }
    for (double dt : L.ito_dts) {
      require_positive(dt, "liouville.ito_dts");
      if (!is_multiple(dt, noise.dt)) throw ConfigError("ito dt is not a multiple of noise.dt");
      if (!is_multiple(L.ito_T, dt)) throw ConfigError("ito_T is not a multiple of the ito dt");
    }
    inside(L.s, L.s + L.ito_T, "ito window", lo, hi - L.ito_T);
  }
}

void write_atomic(const fs::path& file, const std::string& contents) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, file);
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Writer w(cfg.output_dir);
  RunSummary sum;
  if (runs(cfg.mode, Mode::Audit)) run_audit(cfg, w, sum);
  if (runs(cfg.mode, Mode::Simulate)) run_simulate(cfg, w, sum);
  if (runs(cfg.mode, Mode::Absorb)) run_absorb(cfg, w, sum);
  if (runs(cfg.mode, Mode::Tails)) run_tails(cfg, w, sum);
  if (runs(cfg.mode, Mode::Measure)) run_measure(cfg, w, sum);
  if (runs(cfg.mode, Mode::Liouville)) run_liouville(cfg, w, sum);

  json man;
  man["tool"] = "slch";
  man["version"] = kVersion;
  man["mode"] = mode_name(cfg.mode);
  man["seeds"] = cfg.noise.seeds;
  man["model_hash"] = cfg.model.hash();
  man["config_hash"] = hex64(fnv1a64(cfg.canonical));
  man["config"] = json::parse(cfg.canonical);
  man["files"] = w.manifest_files();
  w.put("manifest.json", man.dump(2) + "\n");
  sum.files = w.files();
  return sum;
}

ErrorReport describe_error(const std::exception& e) {
  ErrorReport r;
  json j;
  j["message"] = e.what();
  j["context"] = json::object();
  if (const auto* b = dynamic_cast<const BlowUpError*>(&e)) {
    r.exit_code = 3;
    j["code"] = "blow_up";
    j["context"]["last_finite_time"] = b->last_finite_time();
    json hist = json::array();
    for (double x : b->norm_history()) hist.push_back(std::isfinite(x) ? json(x) : json(fmt_double(x)));
    j["context"]["norm_history"] = hist;
  } else if (const auto* s = dynamic_cast<const SpanError*>(&e)) {
    r.exit_code = 4;
    j["code"] = "span_error";
    j["context"]["admissible_lo"] = s->admissible_lo();
    j["context"]["admissible_hi"] = s->admissible_hi();
  } else if (const auto* m = dynamic_cast<const MissingArtifactError*>(&e)) {
    r.exit_code = 4;
    j["code"] = "missing_artifact";
    j["context"]["path"] = m->path();
  } else if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
             dynamic_cast<const WrongRegimeError*>(&e)) {
    r.exit_code = 2;
    j["code"] = "invalid_config";
  } else {
    r.exit_code = 1;
    j["code"] = "internal";
  }
  r.json = j.dump();
  return r;
}

}  // namespace slch
