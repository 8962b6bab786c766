#include "slch/liouville.hpp"

#include <algorithm>
#include <cmath>

#include "drift_kernel.hpp"
#include "slch/error.hpp"
#include "slch/parallel.hpp"

namespace slch {

namespace {

double smoothstep5(double y) { return y * y * y * (10.0 + y * (-15.0 + 6.0 * y)); }
double smoothstep5_d1(double y) { return 30.0 * y * y * (1.0 - y) * (1.0 - y); }
double smoothstep5_d2(double y) { return 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y); }

std::int64_t whole(double len, double unit, const char* what) {
  const double m = len / unit;
  const double mr = std::nearbyint(m);
  if (std::abs(m - mr) > 1e-9 * std::max(1.0, std::abs(m)))
    throw ConfigError(std::string(what) + " is not a multiple of the scheme step");
  return static_cast<std::int64_t>(mr);
}

// Per-atom quantities for every test function; buffers reused across atoms.
class AtomEvaluator {
 public:
  AtomEvaluator(const ModelSpec& spec, const std::vector<CylindricalTestFunction>& tfs)
      : spec_(spec), tfs_(tfs), kernel_(spec), n_(spec.f.alpha1.size()),
        F_(n_), G_(n_), f_(n_), g_(n_) {
    for (const auto& tf : tfs) {
      const std::size_t m = tf.m();
      std::vector<double> gram(m * m);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          gram[a * m + b] = span_ops::dot(tf.basis()[a].values(), tf.basis()[b].values());
      grams_.push_back(std::move(gram));
    }
  }

  struct Out {
    double value, drift, diffusion, correction, bound;
    bool violated;
    std::vector<double> pF, pG;
  };

  void prepare(double t, std::span<const double> u) {
    kernel_.ito(t, u, F_);
    kernel_.diffusion(t, u, G_);
    span_ops::eval_f(spec_, u, f_);
    span_ops::eval_g(spec_, t, u, g_);
    unorm_ = std::sqrt(span_ops::sum_sq(u));
    f1_ = 0.0;
    for (double x : f_) f1_ += std::abs(x);
    gnorm_ = std::sqrt(span_ops::sum_sq(g_));
    u_ = u;
  }

  void evaluate(std::size_t which, Out& o) {
    const auto& tf = tfs_[which];
    const std::size_t m = tf.m();
    tf.coordinates(u_, x_);
    tf.partials(x_, o.value, d1_, d2_);
    o.pF.resize(m);
    o.pG.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      o.pF[k] = span_ops::dot(F_, tf.basis()[k].values());
      o.pG[k] = span_ops::dot(G_, tf.basis()[k].values());
    }
    o.drift = 0.0;
    o.diffusion = 0.0;
    o.correction = 0.0;
    double gsq = 0.0;
    const auto& gram = grams_[which];
    for (std::size_t a = 0; a < m; ++a) {
      o.drift += d1_[a] * o.pF[a];
      o.diffusion += d1_[a] * o.pG[a];
      for (std::size_t b = 0; b < m; ++b) {
        o.correction += d2_[a * m + b] * o.pG[a] * o.pG[b];
        gsq += d1_[a] * d1_[b] * gram[a * m + b];
      }
    }
    o.correction *= 0.5;
    const double gn = std::sqrt(std::max(gsq, 0.0));
    o.bound = ((16.0 + spec_.lambda) * unorm_ + 4.0 * f1_ + gnorm_) * gn;
    o.violated = std::abs(o.drift) > o.bound * (1.0 + 1e-9) + 1e-300;
  }

 private:
  const ModelSpec& spec_;
  const std::vector<CylindricalTestFunction>& tfs_;
  detail::DriftKernel kernel_;
  std::size_t n_;
  std::vector<double> F_, G_, f_, g_;
  std::vector<std::vector<double>> grams_;
  std::vector<double> x_, d1_, d2_;
  std::span<const double> u_;
  double unorm_ = 0.0, f1_ = 0.0, gnorm_ = 0.0;
};

struct Accumulator {
  std::vector<TestFunctionSeries> fs;

  Accumulator(const std::vector<CylindricalTestFunction>& tfs, std::size_t nodes) {
    for (const auto& tf : tfs) {
      TestFunctionSeries s;
      s.name = tf.name();
      s.sup_psi = tf.sup_bound();
      s.psi.assign(nodes, 0.0);
      s.drift.assign(nodes, 0.0);
      s.diffusion.assign(nodes, 0.0);
      s.correction.assign(nodes, 0.0);
      s.bound.assign(nodes, 0.0);
      s.basis_drift_max.assign(tf.m() * nodes, 0.0);  // per-node sums first
      s.basis_diff_max.assign(tf.m() * nodes, 0.0);
      fs.push_back(std::move(s));
    }
  }

  void add(std::size_t f, std::size_t i, double w, const AtomEvaluator::Out& o) {
    auto& s = fs[f];
    s.psi[i] += w * o.value;
    s.drift[i] += w * o.drift;
    s.diffusion[i] += w * o.diffusion;
    s.correction[i] += w * o.correction;
    s.bound[i] += w * o.bound;
    if (o.violated) ++s.atom_bound_violations;
    const std::size_t m = o.pF.size();
    for (std::size_t k = 0; k < m; ++k) {
      s.basis_drift_max[i * m + k] += w * o.pF[k];
      s.basis_diff_max[i * m + k] += w * o.pG[k];
    }
  }

  void merge(const Accumulator& other) {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      auto& a = fs[f];
      const auto& b = other.fs[f];
      for (std::size_t i = 0; i < a.psi.size(); ++i) {
        a.psi[i] += b.psi[i];
        a.drift[i] += b.drift[i];
        a.diffusion[i] += b.diffusion[i];
        a.correction[i] += b.correction[i];
        a.bound[i] += b.bound[i];
      }
      for (std::size_t i = 0; i < a.basis_drift_max.size(); ++i) {
        a.basis_drift_max[i] += b.basis_drift_max[i];
        a.basis_diff_max[i] += b.basis_diff_max[i];
      }
      a.atom_bound_violations += b.atom_bound_violations;
    }
  }

  // Per-node basis sums -> max over nodes.
  void finish(const std::vector<CylindricalTestFunction>& tfs, std::size_t nodes) {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const std::size_t m = tfs[f].m();
      std::vector<double> dm(m, 0.0), gm(m, 0.0);
      for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t k = 0; k < m; ++k) {
          dm[k] = std::max(dm[k], std::abs(fs[f].basis_drift_max[i * m + k]));
          gm[k] = std::max(gm[k], std::abs(fs[f].basis_diff_max[i * m + k]));
        }
      fs[f].basis_drift_max = std::move(dm);
      fs[f].basis_diff_max = std::move(gm);
      // Probability measures integrate a constant exactly.
      if (tfs[f].is_constant()) std::fill(fs[f].psi.begin(), fs[f].psi.end(), tfs[f].eval(0.0 * tfs[f].basis()[0]));
    }
  }
};

}  // namespace

// Profiles ---------------------------------------------------------------------

double Profile1D::value(double x) const noexcept {
  switch (kind) {
    case Kind::Bump: {
      const double s = (x - center) / radius;
      if (std::abs(s) >= 1.0) return 0.0;
      const double a = 1.0 - s * s;
      return a * a * a;
    }
    case Kind::LinearPlateau: {
      const double y = std::clamp((std::abs(x) - radius) / radius, 0.0, 1.0);
      return x * (1.0 - smoothstep5(y));
    }
    case Kind::Constant: return center;
  }
  return 0.0;
}

double Profile1D::d1(double x) const noexcept {
  switch (kind) {
    case Kind::Bump: {
      const double s = (x - center) / radius;
      if (std::abs(s) >= 1.0) return 0.0;
      const double a = 1.0 - s * s;
      return -6.0 * s * a * a / radius;
    }
    case Kind::LinearPlateau: {
      const double y = (std::abs(x) - radius) / radius;
      if (y <= 0.0) return 1.0;
      if (y >= 1.0) return 0.0;
      return (1.0 - smoothstep5(y)) - std::abs(x) * smoothstep5_d1(y) / radius;
    }
    case Kind::Constant: return 0.0;
  }
  return 0.0;
}

double Profile1D::d2(double x) const noexcept {
  switch (kind) {
    case Kind::Bump: {
      const double s = (x - center) / radius;
      if (std::abs(s) >= 1.0) return 0.0;
      return (1.0 - s * s) * (30.0 * s * s - 6.0) / (radius * radius);
    }
    case Kind::LinearPlateau: {
      const double y = (std::abs(x) - radius) / radius;
      if (y <= 0.0 || y >= 1.0) return 0.0;
      const double sg = x < 0.0 ? -1.0 : 1.0;
      return -sg * (2.0 * smoothstep5_d1(y) / radius + std::abs(x) * smoothstep5_d2(y) / (radius * radius));
    }
    case Kind::Constant: return 0.0;
  }
  return 0.0;
}

// Test functions ---------------------------------------------------------------

CylindricalTestFunction::CylindricalTestFunction(std::string name, std::vector<LatticeState> basis,
                                                 std::vector<Profile1D> profiles)
    : name_(std::move(name)), basis_(std::move(basis)), profiles_(std::move(profiles)) {
  if (basis_.size() != profiles_.size()) throw ConfigError("test function needs one profile per basis vector");
  if (basis_.empty()) throw ConfigError("test function needs at least one basis vector");
  for (const auto& e : basis_) require_same_shape(basis_.front(), e, "test function basis");
  for (const auto& p : profiles_)
    if (p.kind != Profile1D::Kind::Constant && !(p.radius > 0.0)) throw ConfigError("profile radius must be > 0");
}

CylindricalTestFunction CylindricalTestFunction::bump(const std::vector<int>& sites, int window_radius, Boundary b,
                                                      double radius) {
  std::vector<LatticeState> basis;
  std::vector<Profile1D> prof;
  std::string name = "bump";
  for (int s : sites) {
    basis.push_back(LatticeState::unit_impulse(window_radius, s, b));
    prof.push_back({Profile1D::Kind::Bump, 0.0, radius});
    name += "_" + std::to_string(s);
  }
  return {name, std::move(basis), std::move(prof)};
}

CylindricalTestFunction CylindricalTestFunction::smooth_bump(int window_radius, Boundary b, double width,
                                                             double radius) {
  LatticeState e = LatticeState::from_profile(window_radius, b, [width](int i) {
    return std::exp(-static_cast<double>(i) * static_cast<double>(i) / (2.0 * width * width));
  });
  e *= 1.0 / norm(e);
  return {"smooth_bump", {std::move(e)}, {{Profile1D::Kind::Bump, 0.0, radius}}};
}

CylindricalTestFunction CylindricalTestFunction::linear(int site, int window_radius, Boundary b, double radius) {
  return {"linear_" + std::to_string(site),
          {LatticeState::unit_impulse(window_radius, site, b)},
          {{Profile1D::Kind::LinearPlateau, 0.0, radius}}};
}

CylindricalTestFunction CylindricalTestFunction::constant(double value, int window_radius, Boundary b) {
  return {"constant", {LatticeState::unit_impulse(window_radius, 0, b)}, {{Profile1D::Kind::Constant, value, 1.0}}};
}

bool CylindricalTestFunction::is_constant() const noexcept {
  return std::all_of(profiles_.begin(), profiles_.end(),
                     [](const Profile1D& p) { return p.kind == Profile1D::Kind::Constant; });
}

void CylindricalTestFunction::coordinates(std::span<const double> u, std::vector<double>& x) const {
  x.resize(basis_.size());
  for (std::size_t k = 0; k < basis_.size(); ++k) x[k] = span_ops::dot(u, basis_[k].values());
}

void CylindricalTestFunction::partials(std::span<const double> x, double& value, std::vector<double>& d1,
                                       std::vector<double>& d2) const {
  const std::size_t m = basis_.size();
  double p[16], q[16], r[16];
  std::vector<double> pv, qv, rv;
  double *P = p, *Q = q, *R = r;
  if (m > 16) {
    pv.resize(m);
    qv.resize(m);
    rv.resize(m);
    P = pv.data();
    Q = qv.data();
    R = rv.data();
  }
  for (std::size_t k = 0; k < m; ++k) {
    P[k] = profiles_[k].value(x[k]);
    Q[k] = profiles_[k].d1(x[k]);
    R[k] = profiles_[k].d2(x[k]);
  }
  value = 1.0;
  for (std::size_t k = 0; k < m; ++k) value *= P[k];
  d1.assign(m, 0.0);
  d2.assign(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      double v = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (k == a && k == b) v *= R[k];
        else if (k == a || k == b) v *= Q[k];
        else v *= P[k];
      }
      d2[a * m + b] = v;
      d2[b * m + a] = v;
    }
    double v = 1.0;
    for (std::size_t k = 0; k < m; ++k) v *= (k == a) ? Q[k] : P[k];
    d1[a] = v;
  }
}

double CylindricalTestFunction::eval(const LatticeState& u) const {
  require_same_shape(basis_.front(), u, "test function argument");
  std::vector<double> x, d1, d2;
  coordinates(u.values(), x);
  double v = 0.0;
  partials(x, v, d1, d2);
  return v;
}

LatticeState CylindricalTestFunction::grad(const LatticeState& u) const {
  require_same_shape(basis_.front(), u, "test function argument");
  std::vector<double> x, d1, d2;
  coordinates(u.values(), x);
  double v = 0.0;
  partials(x, v, d1, d2);
  LatticeState g(u.window_radius(), u.boundary());
  for (std::size_t k = 0; k < m(); ++k) g += d1[k] * basis_[k];
  return g;
}

double CylindricalTestFunction::hess(const LatticeState& u, const LatticeState& v, const LatticeState& w) const {
  require_same_shape(basis_.front(), u, "test function argument");
  std::vector<double> x, d1, d2, pv, pw;
  coordinates(u.values(), x);
  coordinates(v.values(), pv);
  coordinates(w.values(), pw);
  double val = 0.0;
  partials(x, val, d1, d2);
  double s = 0.0;
  for (std::size_t a = 0; a < m(); ++a)
    for (std::size_t b = 0; b < m(); ++b) s += d2[a * m() + b] * pv[a] * pw[b];
  return s;
}

double CylindricalTestFunction::sup_bound() const {
  double s = 1.0;
  for (const auto& p : profiles_) {
    switch (p.kind) {
      case Profile1D::Kind::Bump: break;
      case Profile1D::Kind::Constant: s *= std::abs(p.center); break;
      case Profile1D::Kind::LinearPlateau: {
        double mx = 0.0;
        for (int i = 0; i <= 4000; ++i) mx = std::max(mx, std::abs(p.value(2.0 * p.radius * i / 4000.0)));
        s *= mx;
        break;
      }
    }
  }
  return s;
}

std::vector<CylindricalTestFunction> default_test_functions(int window_radius, Boundary b, double radius) {
  const int s1 = std::min(1, window_radius);
  return {CylindricalTestFunction::bump({0, s1}, window_radius, b, radius),
          CylindricalTestFunction::smooth_bump(window_radius, b, 2.0, radius),
          CylindricalTestFunction::linear(0, window_radius, b, radius)};
}

// Ito formula on one trajectory ------------------------------------------------

ItoTerms ito_residual(const ModelSpec& spec, const NoisePath& path, const Trajectory& traj,
                      const CylindricalTestFunction& tf, double sigma, double t) {
  if (traj.frame != Frame::UFrame) throw ConfigError("Ito residual needs a u-frame trajectory");
  if (traj.times.size() != traj.path_nodes.size() || traj.times.size() < 2)
    throw ConfigError("trajectory has no path nodes");
  const auto locate = [&](double x) {
    for (std::size_t j = 0; j < traj.times.size(); ++j)
      if (std::abs(traj.times[j] - x) <= 1e-9 * std::max(1.0, std::abs(x))) return j;
    throw SpanError("time not on the recorded grid", traj.times.front(), traj.times.back());
  };
  const std::size_t j0 = locate(sigma), j1 = locate(t);
  if (j1 < j0) throw ConfigError("Ito residual needs sigma <= t");
  for (std::size_t j = j0; j + 1 <= j1; ++j)
    if (std::abs((traj.times[j + 1] - traj.times[j]) - traj.dt) > 1e-9 * traj.dt)
      throw ConfigError("Ito residual needs a trajectory recorded at every step");

  const std::vector<CylindricalTestFunction> one{tf};
  AtomEvaluator ev(spec, one);
  AtomEvaluator::Out o;
  ItoTerms r;
  for (std::size_t j = j0; j < j1; ++j) {
    ev.prepare(traj.times[j], traj.states[j].values());
    ev.evaluate(0, o);
    const double dW = path.increment_between(traj.path_nodes[j], traj.path_nodes[j + 1]);
    r.drift += o.drift * traj.dt;
    r.stochastic += o.diffusion * dW;
    r.correction += o.correction * traj.dt;
  }
  r.bracket = tf.eval(traj.states[j1]) - tf.eval(traj.states[j0]);
  r.residual = r.bracket - r.drift - r.stochastic - r.correction;
  return r;
}

// Liouville series -------------------------------------------------------------

MeasureSeries liouville_series(const ModelSpec& spec, const NoisePath& path, const LiouvilleConfig& cfg,
                               const std::vector<CylindricalTestFunction>& tfs) {
  if (tfs.empty()) throw ConfigError("no test functions");
  if (!(cfg.t > cfg.s)) throw ConfigError("Liouville balance needs t > s");
  if (!(cfg.window > 0.0) || !(cfg.start_spacing > 0.0)) throw ConfigError("window and start spacing must be > 0");
  if (!(cfg.scheme.dt > 0.0)) throw ConfigError("scheme dt must be > 0");
  require_same_shape(spec.f.alpha1, cfg.xi.value, "initial selection");
  for (const auto& tf : tfs) require_same_shape(spec.f.alpha1, tf.basis().front(), "test function basis");

  const double dt = cfg.scheme.dt;
  const std::int64_t nt = whole(cfg.t - cfg.s, dt, "t - s");
  const std::int64_t wn = whole(cfg.window, dt, "window");
  const std::int64_t dn = whole(cfg.start_spacing, dt, "start spacing");
  const NoisePath P = shift_path(path, -cfg.tau);
  (void)P.index_of(cfg.s - cfg.window);
  (void)P.index_of(cfg.t);
  const OuSamples ou = ou_from_path(P);

  const auto nodes = static_cast<std::size_t>(nt + 1);
  MeasureSeries out;
  out.dt = dt;
  out.window = cfg.window;
  out.atoms_per_measure = static_cast<std::size_t>(wn / dn);
  if (wn % dn != 0) throw ConfigError("window is not a multiple of the start spacing");
  for (std::size_t i = 0; i < nodes; ++i) out.times.push_back(cfg.s + static_cast<double>(i) * dt);
  for (std::size_t i = 0; i + 1 < nodes; ++i)
    out.dW.push_back(P.increment_between(P.index_of(out.times[i]), P.index_of(out.times[i + 1])));

  // Starts s_j = s - W + j spacing with s_j < t; offsets in scheme steps from s.
  std::vector<std::int64_t> offs;
  for (std::int64_t o = -wn; o < nt; o += dn) offs.push_back(o);
  const std::size_t J = offs.size();
  const std::size_t chunks = std::min<std::size_t>(16, J);
  std::vector<Accumulator> acc;
  for (std::size_t c = 0; c < chunks; ++c) acc.emplace_back(tfs, nodes);
  const double w = 1.0 / static_cast<double>(out.atoms_per_measure);
  const std::size_t n = spec.f.alpha1.size();

  parallel_for(
      chunks,
      [&](std::size_t c) {
        AtomEvaluator ev(spec, tfs);
        AtomEvaluator::Out o;
        std::vector<double> u(n), h(n), hp(n);
        for (std::size_t j = c * J / chunks; j < (c + 1) * J / chunks; ++j) {
          const std::int64_t off = offs[j];
          const double sj = cfg.s + static_cast<double>(off) * dt;
          const std::int64_t last = std::min<std::int64_t>(off + wn, nt);
          const double Tj = cfg.s + static_cast<double>(last) * dt;
          std::int64_t step = 0;
          const StepObserver obs = [&](double time, const LatticeState& v) {
            const std::int64_t rel = step++;
            const std::int64_t i = off + rel;
            if (rel < 1 || rel > wn || i < 0 || i > nt) return;
            const double z = ou.at(time);
            span_ops::eval_h(spec, time, h, hp);
            const auto vv = v.values();
            if (spec.k > 0.0) {
              const double ekz = std::exp(spec.k * z);
              for (std::size_t a = 0; a < n; ++a) u[a] = ekz * vv[a] - h[a] / spec.k;
            } else {
              for (std::size_t a = 0; a < n; ++a) u[a] = vv[a] + z * h[a];
            }
            ev.prepare(time, u);
            for (std::size_t f = 0; f < tfs.size(); ++f) {
              ev.evaluate(f, o);
              acc[c].add(f, static_cast<std::size_t>(i), w, o);
            }
          };
          const LatticeState v0 = u_to_v(spec, ou, sj, cfg.xi(sj));
          (void)advance(spec, ou, sj, Tj, v0, cfg.scheme, obs);
        }
      },
      cfg.workers);

  for (std::size_t c = 1; c < chunks; ++c) acc[0].merge(acc[c]);
  acc[0].finish(tfs, nodes);
  out.functions = std::move(acc[0].fs);
  return out;
}

MeasureSeries series_from_measures(const ModelSpec& spec, const std::vector<double>& times,
                                   const std::vector<double>& dW, const std::vector<EmpiricalMeasure>& measures,
                                   const std::vector<CylindricalTestFunction>& tfs) {
  if (times.size() < 2 || measures.size() != times.size() || dW.size() + 1 != times.size())
    throw ConfigError("series needs one measure per node and one increment per interval");
  MeasureSeries out;
  out.times = times;
  out.dW = dW;
  out.dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - out.dt) > 1e-9 * out.dt) throw ConfigError("nodes are not equispaced");
  out.atoms_per_measure = measures.front().size();
  out.window = measures.front().window;
  Accumulator acc(tfs, times.size());
  AtomEvaluator ev(spec, tfs);
  AtomEvaluator::Out o;
  for (std::size_t i = 0; i < times.size(); ++i) {
    measures[i].validate();
    for (std::size_t j = 0; j < measures[i].size(); ++j) {
      require_same_shape(spec.f.alpha1, measures[i].atoms[j], "measure atom");
      ev.prepare(times[i], measures[i].atoms[j].values());
      for (std::size_t f = 0; f < tfs.size(); ++f) {
        ev.evaluate(f, o);
        acc.add(f, i, measures[i].weights[j], o);
      }
    }
  }
  acc.finish(tfs, times.size());
  out.functions = std::move(acc.fs);
  return out;
}

// Residuals --------------------------------------------------------------------

LiouvilleResidual liouville_residual(const MeasureSeries& series, std::size_t tf, std::size_t i0, std::size_t i1) {
  if (tf >= series.functions.size()) throw ConfigError("test function index out of range");
  if (i0 > i1 || i1 >= series.times.size())
    throw SpanError("residual nodes outside the series", series.times.front(), series.times.back());
  const auto& f = series.functions[tf];
  LiouvilleResidual r;
  r.test_function = f.name;
  r.s = series.times[i0];
  r.t = series.times[i1];
  r.bracket = f.psi[i1] - f.psi[i0];
  for (std::size_t i = i0; i < i1; ++i) {
    r.drift += f.drift[i] * series.dt;
    r.stochastic += f.diffusion[i] * series.dW[i];
    r.correction += f.correction[i] * series.dt;
  }
  r.residual = r.bracket - r.drift - r.stochastic - r.correction;
  const double scale =
      std::abs(r.bracket) + std::abs(r.drift) + std::abs(r.stochastic) + std::abs(r.correction) + 1e-12;
  r.relative = std::abs(r.residual) / scale;
  return r;
}

LiouvilleResidual liouville_residual(const MeasureSeries& series, std::size_t tf) {
  return liouville_residual(series, tf, 0, series.times.size() - 1);
}

bool StatSolutionReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const StatSolutionEntry& e) {
    return e.continuity_ok && e.integrability_ok && e.bound_ok && e.liouville_ok;
  });
}

StatSolutionReport statistical_solution_checks(const MeasureSeries& series, double liouville_tolerance) {
  StatSolutionReport rep;
  for (std::size_t f = 0; f < series.functions.size(); ++f) {
    const auto& s = series.functions[f];
    StatSolutionEntry e;
    e.test_function = s.name;
    for (std::size_t i = 1; i < s.psi.size(); ++i)
      e.continuity_modulus = std::max(e.continuity_modulus, std::abs(s.psi[i] - s.psi[i - 1]));
    bool finite = true, under = s.atom_bound_violations == 0;
    double corr_sup = 0.0;
    for (std::size_t i = 0; i < s.drift.size(); ++i) {
      e.drift_sup = std::max(e.drift_sup, std::abs(s.drift[i]));
      e.diffusion_sup = std::max(e.diffusion_sup, std::abs(s.diffusion[i]));
      corr_sup = std::max(corr_sup, std::abs(s.correction[i]));
      finite = finite && std::isfinite(s.drift[i]) && std::isfinite(s.diffusion[i]) && std::isfinite(s.psi[i]);
      under = under && std::abs(s.drift[i]) <= s.bound[i] * (1.0 + 1e-9) + 1e-300;
    }
    const double dt = series.dt;
    const double levy = dt < 1.0 ? std::sqrt(2.0 * dt * std::log(1.0 / dt)) : std::sqrt(dt);
    const double churn = series.atoms_per_measure > 0 ? 2.0 * s.sup_psi / static_cast<double>(series.atoms_per_measure) : 0.0;
    e.continuity_envelope = 2.0 * levy * e.diffusion_sup + (e.drift_sup + corr_sup) * dt + churn + 0.05 * s.sup_psi;
    e.continuity_ok = finite && e.continuity_modulus <= e.continuity_envelope;
    e.integrability_ok = finite;
    e.bound_ok = under;
    e.liouville = liouville_residual(series, f);
    e.liouville_ok = e.liouville.relative <= liouville_tolerance;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace slch
