#include <cmath>
#include <numbers>
#include <memory>

#include "drift_kernel.hpp"
#include "slch/dynamics.hpp"
#include "slch/error.hpp"
#include "slch/format.hpp"

namespace slch {

namespace {

// Solver for (I + h A^2) x = b.
class StiffSolver {
 public:
  StiffSolver(std::size_t n, double h, Boundary b) : n_(n), boundary_(b) {
    if (b == Boundary::ZeroPad) factor_banded(h);
    else build_circulant(h);
  }

  void solve(std::span<const double> rhs, std::span<double> x) const {
    if (boundary_ == Boundary::ZeroPad) solve_banded(rhs, x);
    else solve_circulant(rhs, x);
  }

 private:
  // Symmetric pentadiagonal LDL^T; L unit lower with two subdiagonals l1, l2.
  void factor_banded(double h) {
    d_.assign(n_, 0.0);
    l1_.assign(n_, 0.0);
    l2_.assign(n_, 0.0);
    auto diag = [&](std::size_t i) {
      if (n_ == 1) return 1.0 + 4.0 * h;
      return 1.0 + h * ((i == 0 || i + 1 == n_) ? 5.0 : 6.0);
    };
    const double o1 = -4.0 * h, o2 = h;
    for (std::size_t i = 0; i < n_; ++i) {
      // Row i of M: M(i,i-2) = o2, M(i,i-1) = o1, M(i,i) = diag.
      if (i >= 2) l2_[i] = o2 / d_[i - 2];
      if (i >= 1) {
        double s = o1;
        if (i >= 2) s -= l2_[i] * d_[i - 2] * l1_[i - 1];
        l1_[i] = s / d_[i - 1];
      }
      double di = diag(i);
      if (i >= 1) di -= l1_[i] * l1_[i] * d_[i - 1];
      if (i >= 2) di -= l2_[i] * l2_[i] * d_[i - 2];
      d_[i] = di;
    }
  }

  void solve_banded(std::span<const double> rhs, std::span<double> x) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = rhs[i];
      if (i >= 1) s -= l1_[i] * x[i - 1];
      if (i >= 2) s -= l2_[i] * x[i - 2];
      x[i] = s;
    }
    for (std::size_t i = 0; i < n_; ++i) x[i] /= d_[i];
    for (std::size_t i = n_; i-- > 0;) {
      double s = x[i];
      if (i + 1 < n_) s -= l1_[i + 1] * x[i + 1];
      if (i + 2 < n_) s -= l2_[i + 2] * x[i + 2];
      x[i] = s;
    }
  }

  // First row of the inverse circulant, from the eigenvalues 1 + h mu_k^2.
  void build_circulant(double h) {
    row_.assign(n_, 0.0);
    const double nn = static_cast<double>(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / nn;
        const double mu = 2.0 - 2.0 * std::cos(th);
        const double ang = 2.0 * std::numbers::pi * static_cast<double>((j * k) % n_) / nn;
        s += std::cos(ang) / (1.0 + h * mu * mu);
      }
      row_[j] = s / nn;
    }
  }

  void solve_circulant(std::span<const double> rhs, std::span<double> x) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t d = i >= j ? i - j : i + n_ - j;
        s += row_[d] * rhs[j];
      }
      x[i] = s;
    }
  }

  std::size_t n_;
  Boundary boundary_;
  std::vector<double> d_, l1_, l2_, row_;
};

struct Grid {
  std::size_t n0, n1, m;
  double h;
};

Grid make_grid(const NoisePath& path, double tau, double T, double dt) {
  if (!(T >= tau)) throw ConfigError("integration needs T >= tau");
  if (!(dt > 0.0)) throw ConfigError("scheme dt must be > 0");
  const double ratio = dt / path.dt();
  const double mr = std::nearbyint(ratio);
  if (mr < 1.0 || std::abs(ratio - mr) > 1e-9 * ratio)
    throw ConfigError("scheme dt " + fmt_double(dt) + " is not a multiple of the path dt " +
                      fmt_double(path.dt()));
  Grid g;
  g.m = static_cast<std::size_t>(mr);
  g.n0 = path.index_of(tau);
  g.n1 = path.index_of(T);
  if ((g.n1 - g.n0) % g.m != 0)
    throw ConfigError("[tau, T] is not tiled by the scheme step " + fmt_double(dt));
  g.h = static_cast<double>(g.m) * path.dt();
  return g;
}

Trajectory run(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
               const LatticeState& v_tau, const SchemeConfig& cfg, bool record_all,
               const StepObserver& observer) {
  require_same_shape(spec.f.alpha1, v_tau, "integrate");
  const NoisePath& path = ou.path;
  const Grid g = make_grid(path, tau, T, cfg.dt);
  // Touch both ends so that span errors surface before any work.
  (void)ou.at_index(g.n0);
  (void)ou.at_index(g.n1);

  const std::size_t n = v_tau.size();
  const std::size_t stride = cfg.record_stride == 0 ? 1 : cfg.record_stride;
  detail::DriftKernel kern(spec);
  std::vector<double> v(v_tau.values().begin(), v_tau.values().end());
  std::vector<double> r(n), k1, k2, k3, k4, y;
  std::unique_ptr<StiffSolver> solver;
  if (cfg.scheme == Scheme::ImexSplit) solver = std::make_unique<StiffSolver>(n, g.h, spec.boundary());
  if (cfg.scheme == Scheme::RK4) {
    k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); y.resize(n);
  }

  Trajectory tr;
  tr.frame = Frame::VFrame;
  tr.dt = g.h;
  tr.provenance = {path.seed(), spec.hash(), std::string(scheme_name(cfg.scheme))};
  auto record = [&](std::size_t node) {
    const double t = path.time_at(node);
    if (record_all) {
      tr.times.push_back(t);
      tr.path_nodes.push_back(node);
      tr.states.emplace_back(v_tau.window_radius(), v_tau.boundary(), v);
      if (observer) observer(t, tr.states.back());
    } else if (observer) {
      observer(t, LatticeState(v_tau.window_radius(), v_tau.boundary(), v));
    }
  };
  if (record_all || observer) record(g.n0);

  std::vector<double> history;
  std::size_t step = 0;
  const double h = g.h;
  for (std::size_t node = g.n0; node < g.n1; node += g.m) {
    const double t = path.time_at(node);
    const double z0 = ou.at_index(node);
    switch (cfg.scheme) {
      case Scheme::ExplicitEuler:
        kern.full(t, z0, v, r);
        for (std::size_t i = 0; i < n; ++i) v[i] += h * r[i];
        break;
      case Scheme::ImexSplit:
        kern.explicit_part(t, z0, v, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = v[i] + h * r[i];
        solver->solve(r, v);
        break;
      case Scheme::RK4: {
        const double z1 = ou.at_index(node + g.m);
        const double tm = t + 0.5 * h;
        const double zm = (g.m % 2 == 0) ? ou.at_index(node + g.m / 2) : 0.5 * (z0 + z1);
        kern.full(t, z0, v, k1);
        for (std::size_t i = 0; i < n; ++i) y[i] = v[i] + 0.5 * h * k1[i];
        kern.full(tm, zm, y, k2);
        for (std::size_t i = 0; i < n; ++i) y[i] = v[i] + 0.5 * h * k2[i];
        kern.full(tm, zm, y, k3);
        for (std::size_t i = 0; i < n; ++i) y[i] = v[i] + h * k3[i];
        kern.full(path.time_at(node + g.m), z1, y, k4);
        for (std::size_t i = 0; i < n; ++i)
          v[i] += (h / 6.0) * (((k1[i] + 2.0 * k2[i]) + 2.0 * k3[i]) + k4[i]);
        break;
      }
    }
    const double sup = span_ops::max_abs(v);
    history.push_back(sup);
    if (history.size() > 64) history.erase(history.begin());
    if (!(sup <= cfg.blowup_threshold)) {
      throw BlowUpError("state exceeded " + fmt_double(cfg.blowup_threshold) +
                            " or became non-finite at t = " + fmt_double(path.time_at(node + g.m)),
                        t, history);
    }
    ++step;
    if ((record_all || observer) && (step % stride == 0 || node + g.m == g.n1)) record(node + g.m);
  }
  if (!record_all) {
    tr.times.push_back(path.time_at(g.n1));
    tr.path_nodes.push_back(g.n1);
    tr.states.emplace_back(v_tau.window_radius(), v_tau.boundary(), std::move(v));
  }
  return tr;
}

}  // namespace

Trajectory integrate(const ModelSpec& spec, const NoisePath& path, const OuSamples& ou, double tau,
                     double T, const LatticeState& v_tau, const SchemeConfig& scheme,
                     const StepObserver& observer) {
  if (!ou.path.shares_sample_with(path) || ou.path.anchor() != path.anchor())
    throw ConfigError("OU samples were not derived from this path");
  return run(spec, ou, tau, T, v_tau, scheme, true, observer);
}

LatticeState advance(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& v_tau, const SchemeConfig& scheme) {
  Trajectory tr = run(spec, ou, tau, T, v_tau, scheme, false, {});
  return std::move(tr.states.back());
}

LatticeState advance(const ModelSpec& spec, const OuSamples& ou, double tau, double T,
                     const LatticeState& v_tau, const SchemeConfig& scheme, const StepObserver& observer) {
  SchemeConfig every = scheme;
  every.record_stride = 1;
  Trajectory tr = run(spec, ou, tau, T, v_tau, every, false, observer);
  return std::move(tr.states.back());
}

}  // namespace slch
