#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "slch/dynamics.hpp"
#include "slch/error.hpp"

using namespace slch;

namespace {

ModelSpec linear_model(int R, double k, Boundary b = Boundary::ZeroPad) {
  auto m = ModelSpec::default_compliant(R, b, k);
  m.allow_noncompliant = true;
  m.beta = 0.0;
  m.f.alpha1_profile.amplitude = 0.0;
  m.g.forcing_profile.amplitude = 0.0;
  m.h.profile.amplitude = 0.0;
  m.realize(R, b);
  return m;
}

Eigen::MatrixXd dense_A(int R, Boundary b) {
  const int n = 2 * R + 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2.0;
    if (i > 0) A(i, i - 1) = -1.0;
    if (i + 1 < n) A(i, i + 1) = -1.0;
  }
  if (b == Boundary::Periodic) {
    A(0, n - 1) = -1.0;
    A(n - 1, 0) = -1.0;
  }
  return A;
}

Eigen::VectorXd vec(const LatticeState& u) { return Eigen::Map<const Eigen::VectorXd>(u.values().data(), u.size()); }

LatticeState random_state(int R, std::mt19937_64& rng, double s = 1.0, Boundary b = Boundary::ZeroPad) {
  std::normal_distribution<double> g(0.0, s);
  LatticeState u(R, b);
  for (double& x : u.mutable_values()) x = g(rng);
  return u;
}

double rel_err(const LatticeState& a, const LatticeState& b) { return norm(a - b) / std::max(norm(b), 1e-300); }

}  // namespace

TEST_CASE("linear drift against a dense pentadiagonal product") {
  std::mt19937_64 rng(2);
  for (Boundary b : {Boundary::ZeroPad, Boundary::Periodic}) {
    const int R = 6;
    const auto m = linear_model(R, 0.5, b);
    const auto p = NoisePath::sample(1, -5, 5, 0.01);
    const auto ou = ou_from_path(p);
    const auto A = dense_A(R, b);
    for (double t : {-2.0, 0.0, 1.37}) {
      const auto v = random_state(R, rng, 1.0, b);
      const double z = ou.at(t);
      const Eigen::VectorXd expect = (-A * A) * vec(v) + (0.5 * z - 1.0 - 0.125) * vec(v);
      CHECK((vec(drift_k_pos(m, t, ou, v)) - expect).norm() <= 1e-12 * expect.norm());
    }
  }
}

TEST_CASE("k > 0 drift equals the Ito product rule applied to the SDE") {
  // dv = [e^{-kz} (F(u) + h'/k) + (k z - k^2/2) v] dt with u = e^{kz} v - h/k.
  std::mt19937_64 rng(3);
  const auto m = ModelSpec::default_compliant(7, Boundary::ZeroPad, 0.5);
  const auto ou = ou_from_path(NoisePath::sample(4, -5, 5, 0.01));
  for (double t : {-3.0, 0.5, 2.22}) {
    const auto v = random_state(7, rng, 0.7);
    const double z = ou.at(t), k = m.k;
    const auto [h, hp] = eval_h(m, t);
    const LatticeState u = std::exp(k * z) * v - (1.0 / k) * h;
    const LatticeState expect =
        std::exp(-k * z) * (ito_drift(m, t, u) + (1.0 / k) * hp) + (k * z - 0.5 * k * k) * v;
    CHECK(rel_err(drift_k_pos(m, t, ou, v), expect) <= 1e-12);
    const auto terms = drift_k_pos_terms(m, t, ou, v);
    CHECK(rel_err(terms.total(), expect) <= 1e-12);
    CHECK(rel_err(v_to_u(m, ou, t, v), u) <= 1e-14);
  }
  CHECK_THROWS_AS(drift_k_zero(m, 0.0, ou, LatticeState(7)), WrongRegimeError);
}

TEST_CASE("k = 0 drift equals the chain rule applied to the SDE") {
  // v = u - z h:  dv = [F(v + z h) + z h - z h'] dt.
  std::mt19937_64 rng(5);
  const auto m = ModelSpec::default_compliant(7, Boundary::ZeroPad, 0.0);
  const auto ou = ou_from_path(NoisePath::sample(6, -5, 5, 0.01));
  for (double t : {-1.0, 0.0, 3.3}) {
    const auto v = random_state(7, rng, 0.7);
    const double z = ou.at(t);
    const auto [h, hp] = eval_h(m, t);
    const LatticeState u = v + z * h;
    const LatticeState expect = ito_drift(m, t, u) + z * h - z * hp;
    CHECK(rel_err(drift_k_zero(m, t, ou, v), expect) <= 1e-12);
    CHECK(rel_err(drift(m, t, ou, v), expect) <= 1e-12);
  }
  CHECK_THROWS_AS(drift_k_pos(m, 0.0, ou, LatticeState(7)), WrongRegimeError);
}

TEST_CASE("Stratonovich reading drops exactly the k^2/2 term") {
  auto ito = ModelSpec::default_compliant(5, Boundary::ZeroPad, 0.5);
  auto strat = ito;
  strat.calculus = Calculus::Stratonovich;
  const auto ou = ou_from_path(NoisePath::sample(8, -5, 5, 0.01));
  std::mt19937_64 rng(8);
  const auto v = random_state(5, rng);
  const auto d = drift_k_pos(strat, 1.0, ou, v) - drift_k_pos(ito, 1.0, ou, v);
  CHECK(rel_err(d, 0.125 * v) <= 1e-12);
}

TEST_CASE("transforms are inverse to each other") {
  std::mt19937_64 rng(9);
  for (double k : {0.0, 0.5}) {
    const auto m = ModelSpec::default_compliant(6, Boundary::ZeroPad, k);
    const auto ou = ou_from_path(NoisePath::sample(1, -5, 5, 0.01));
    const auto u = random_state(6, rng, 2.0);
    CHECK(rel_err(v_to_u(m, ou, 1.5, u_to_v(m, ou, 1.5, u)), u) <= 1e-14);
  }
}

TEST_CASE("linear flow against the dense matrix exponential") {
  const int R = 8;
  const auto m = linear_model(R, 0.0);
  const auto path = NoisePath::sample(1, -1, 2, 1e-3);
  const auto ou = ou_from_path(path);
  std::mt19937_64 rng(10);
  const auto v0 = random_state(R, rng);
  const auto A = dense_A(R, Boundary::ZeroPad);
  const Eigen::MatrixXd L = -A * A - Eigen::MatrixXd::Identity(2 * R + 1, 2 * R + 1);
  const Eigen::VectorXd exact = (L * 1.0).exp() * vec(v0);
  const LatticeState ex(R, Boundary::ZeroPad, std::vector<double>(exact.data(), exact.data() + exact.size()));

  SchemeConfig rk4{Scheme::RK4, 1e-3};
  CHECK(norm(advance(m, ou, 0.0, 1.0, v0, rk4) - ex) <= 1e-6 * norm(ex) + 1e-12);

  // First-order implicit step: the error halves with dt.
  double prev = 0.0;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    SchemeConfig imex{Scheme::ImexSplit, dt};
    const double e = norm(advance(m, ou, 0.0, 1.0, v0, imex) - ex);
    if (prev > 0.0) CHECK(e / prev == doctest::Approx(0.5).epsilon(0.1));
    prev = e;
  }
}

TEST_CASE("periodic implicit solve matches the dense resolvent") {
  const int R = 5;
  const auto m = linear_model(R, 0.0, Boundary::Periodic);
  const auto ou = ou_from_path(NoisePath::sample(1, -1, 2, 1e-2));
  std::mt19937_64 rng(12);
  const auto v0 = random_state(R, rng, 1.0, Boundary::Periodic);
  const auto A = dense_A(R, Boundary::Periodic);
  const int n = 2 * R + 1;
  const double h = 0.05;
  // One step: (I + h A^2) v1 = v0 - h lambda v0.
  const Eigen::VectorXd rhs = vec(v0) * (1.0 - h);
  const Eigen::VectorXd expect = (Eigen::MatrixXd::Identity(n, n) + h * A * A).lu().solve(rhs);
  const auto got = advance(m, ou, 0.0, h, v0, {Scheme::ImexSplit, h});
  CHECK((vec(got) - expect).norm() <= 1e-13 * expect.norm());
}

TEST_CASE("integration contract") {
  const auto m = ModelSpec::default_compliant(4);
  const auto path = NoisePath::sample(2, -5, 5, 0.01);
  const auto ou = ou_from_path(path);
  const LatticeState v0(4);
  CHECK_THROWS_AS(integrate(m, path, ou, 0.0, 1.0, v0, {Scheme::ImexSplit, 0.015}), ConfigError);
  CHECK_THROWS_AS(integrate(m, path, ou, 0.0, 9.0, v0, {Scheme::ImexSplit, 0.01}), SpanError);
  CHECK_THROWS_AS(integrate(m, path, ou, 0.0, 1.0, LatticeState(3), {}), ConfigError);
  const auto other = ou_from_path(NoisePath::sample(3, -5, 5, 0.01));
  CHECK_THROWS_AS(integrate(m, path, other, 0.0, 1.0, v0, {}), ConfigError);

  SchemeConfig sc{Scheme::ImexSplit, 0.02, 7};
  const auto tr = integrate(m, path, ou, 0.0, 1.0, v0, sc);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(1.0));
  CHECK(tr.times.size() == tr.states.size());
  CHECK(tr.path_nodes.back() == path.index_of(1.0));
  CHECK(tr.frame == Frame::VFrame);
  const auto again = integrate(m, path, ou, 0.0, 1.0, v0, sc);
  CHECK(again.final_state() == tr.final_state());
}

TEST_CASE("every scheme agrees on a smooth run") {
  const auto m = ModelSpec::default_compliant(6, Boundary::ZeroPad, 0.5);
  const auto path = NoisePath::sample(5, -2, 3, 1e-3);
  const auto ou = ou_from_path(path);
  std::mt19937_64 rng(14);
  const auto v0 = random_state(6, rng, 0.3);
  const auto ref = advance(m, ou, 0.0, 1.0, v0, {Scheme::RK4, 1e-3});
  CHECK(rel_err(advance(m, ou, 0.0, 1.0, v0, {Scheme::ExplicitEuler, 1e-3}), ref) < 2e-2);
  CHECK(rel_err(advance(m, ou, 0.0, 1.0, v0, {Scheme::ImexSplit, 1e-3}), ref) < 2e-2);
  CHECK(parse_scheme("rk4") == Scheme::RK4);
  CHECK_THROWS_AS(parse_scheme("leapfrog"), ConfigError);
}

TEST_CASE("blow-up is reported with the recent norm history") {
  auto m = model_from_json(R"({"beta": 0, "allow_noncompliant": true, "f": {"form": "classical_cubic"}, "window_radius": 4})");
  const auto path = NoisePath::sample(1, -1, 5, 0.01);
  const auto ou = ou_from_path(path);
  const auto u0 = LatticeState::constant(4, 300.0);
  try {
    (void)solve_u(m, ou, 0.0, 4.0, u0, {Scheme::ImexSplit, 0.01});
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.last_finite_time() >= 0.0);
    CHECK(!e.norm_history().empty());
    CHECK(e.norm_history().size() <= 64);
  }
}

TEST_CASE("Euler-Maruyama converges to the transformed solution") {
  for (double k : {0.0, 0.5}) {
    CAPTURE(k);
    const auto m = ModelSpec::default_compliant(4, Boundary::ZeroPad, k);
    const auto path = NoisePath::sample(3, -1, 2, 1.25e-3 / 8.0);
    const auto ou = ou_from_path(path);
    const auto u0 = LatticeState::constant(4, 0.2);
    const auto ref = solve_u(m, ou, 0.0, 1.0, u0, {Scheme::RK4, 1.25e-3 / 8.0});
    std::vector<double> err;
    for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
      const auto tr = euler_maruyama(m, path, 0.0, 1.0, u0, dt);
      CHECK(tr.frame == Frame::UFrame);
      err.push_back(norm(tr.final_state() - ref));
    }
    CHECK(err.back() < err.front());
    CHECK(err.back() < 0.05);
  }
}

TEST_CASE("cocycle") {
  const auto m = ModelSpec::default_compliant(5, Boundary::ZeroPad, 0.5);
  const auto path = NoisePath::sample(6, -20, 20, 0.01);
  std::mt19937_64 rng(15);
  const auto u = random_state(5, rng, 0.5);
  const SchemeConfig sc{Scheme::ImexSplit, 0.01};
  CHECK(cocycle(m, 0.0, 1.0, path, u, sc) == u);
  const double t = 1.3, s = 0.7, tau = -2.0;
  const auto lhs = cocycle(m, t + s, tau, path, u, sc);
  const auto mid = cocycle(m, s, tau, path, u, sc);
  const auto rhs = cocycle(m, t, tau + s, shift_path(path, s), mid, sc);
  CHECK(rel_err(lhs, rhs) <= 1e-9);
}

TEST_CASE("energy inequality holds with a calibrated constant") {
  const auto m = ModelSpec::default_compliant(6, Boundary::ZeroPad, 0.5);
  const auto path = NoisePath::sample(7, -2, 12, 0.01);
  const auto ou = ou_from_path(path);
  const auto v0 = u_to_v(m, ou, 0.0, LatticeState::constant(6, 1.0));
  const auto tr = integrate(m, path, ou, 0.0, 10.0, v0, {Scheme::ImexSplit, 0.01});
  const auto steps = energy_profile(m, ou, tr);
  CHECK(steps.size() + 1 == tr.states.size());
  const double c = calibrate_energy_constant(steps);
  CHECK(std::isfinite(c));
  CHECK(energy_fraction_satisfied(steps, c) == 1.0);
  for (const auto& s : steps) CHECK(s.weight > 0.0);
}

TEST_CASE("trajectory csv carries provenance") {
  const auto m = ModelSpec::default_compliant(2);
  const auto path = NoisePath::sample(9, -1, 1, 0.1);
  const auto ou = ou_from_path(path);
  auto tr = integrate(m, path, ou, 0.0, 0.5, LatticeState(2), {Scheme::ImexSplit, 0.1});
  tr.provenance = {9, m.hash(), "imex_split"};
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  const auto s = os.str();
  CHECK(s.rfind("# seed=9", 0) == 0);
  CHECK(s.find("t,site_-2,site_-1,site_0,site_1,site_2\n") != std::string::npos);
}
