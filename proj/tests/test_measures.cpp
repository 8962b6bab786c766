#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "slch/error.hpp"
#include "slch/measures.hpp"

using namespace slch;

namespace {

ModelSpec small_model() { return ModelSpec::default_compliant(3, Boundary::ZeroPad, 0.5); }

}  // namespace

TEST_CASE("observables by hand") {
  const LatticeState u(1, Boundary::ZeroPad, {3.0, 4.0, 0.0});
  using K = Observable::Kind;
  CHECK(Observable{K::Constant}(u) == 1.0);
  CHECK(Observable{K::ClippedNormSq, 10.0}(u) == 10.0);
  CHECK(Observable{K::ClippedNormSq, 100.0}(u) == doctest::Approx(25.0));
  CHECK(Observable{K::SiteProjection, 2.0, 0}(u) == 2.0);
  CHECK(Observable{K::SiteProjection, 2.0, 1}(u) == 0.0);
  CHECK(Observable{K::SiteProjection, 5.0, -1}(u) == 3.0);
  CHECK(Observable{K::TanhSiteSum}(u) == doctest::Approx(std::tanh(7.0)));
  const Observable bad{K::SiteProjection, 2.0, 4};
  CHECK_THROWS_AS(bad(u), ConfigError);
  CHECK(Observable{K::SiteProjection, 100.0, 1}.name() == "site_1_clip_100");
  CHECK(Observable{K::ClippedNormSq, 7.0}.sup_bound() == 7.0);
  CHECK(default_observables().size() == 5);
}

TEST_CASE("Cesaro measure atoms are solutions from each start") {
  const auto m = small_model();
  const auto path = NoisePath::sample(2, -20, 10, 1e-2);
  const auto xi = InitialSelection::constant(LatticeState::constant(3, 0.5));
  MeasureBuildOptions opt;
  const auto mu = build_measure(m, path, 2.0, -8.0, 0.5, xi, opt);
  REQUIRE(mu.size() == 20);
  mu.validate();
  CHECK(mu.window == 10.0);
  CHECK(mu.anchor.t == 2.0);
  CHECK(mu.anchor.start == -8.0);
  CHECK(mu.anchor.seed == 2);
  CHECK(mu.starts.front() == -8.0);
  CHECK(mu.starts.back() == doctest::Approx(1.5));
  for (double w : mu.weights) CHECK(w == 1.0 / 20.0);
  const auto ou = ou_from_path(path);
  CHECK(mu.atoms[7] == solve_u(m, ou, mu.starts[7], 2.0, xi.value, opt.scheme));

  const auto j = nlohmann::json::parse(mu.to_json());
  CHECK(j["atoms"].size() == 20);
  CHECK(j["averaging"] == "cesaro");

  CHECK_THROWS_AS(build_measure(m, path, 2.0, -8.0, 0.3, xi), ConfigError);
  CHECK_THROWS_AS(build_measure(m, path, 2.0, 2.0, 0.5, xi), ConfigError);
  CHECK_THROWS_AS(build_measure(m, path, 2.0, -30.0, 0.5, xi), SpanError);
  CHECK_THROWS_AS(build_measure(m, path, 2.0, -8.0, 0.5, InitialSelection::constant(LatticeState(2))), ConfigError);
}

TEST_CASE("thinning keeps a sorted deterministic subset") {
  const auto m = small_model();
  const auto path = NoisePath::sample(3, -20, 10, 1e-2);
  const auto xi = InitialSelection::constant(LatticeState(3));
  MeasureBuildOptions opt;
  opt.atom_cap = 5;
  opt.thinning_seed = 9;
  const auto a = build_measure(m, path, 0.0, -10.0, 0.5, xi, opt);
  const auto b = build_measure(m, path, 0.0, -10.0, 0.5, xi, opt);
  REQUIRE(a.size() == 5);
  CHECK(a.thinned_from == 20);
  CHECK(std::is_sorted(a.starts.begin(), a.starts.end()));
  CHECK(a.starts == b.starts);
  a.validate();
}

TEST_CASE("mixing") {
  const auto m = small_model();
  const auto path = NoisePath::sample(4, -20, 10, 1e-2);
  const auto xi = InitialSelection::constant(LatticeState(3));
  const auto a = build_measure(m, path, 0.0, -4.0, 1.0, xi);
  const auto b = build_measure(m, path, 0.0, -2.0, 1.0, xi);
  const auto c = mix(a, 0.25, b, 0.75);
  c.validate();
  CHECK(c.size() == 6);
  CHECK(c.weights[0] == 0.0625);
  CHECK(c.weights[5] == 0.375);
  const auto other = build_measure(m, path, 1.0, -2.0, 1.0, xi);
  CHECK_THROWS_AS(mix(a, 0.5, other, 0.5), ConfigError);
}

TEST_CASE("invariance residual") {
  const auto m = small_model();
  const auto path = NoisePath::sample(5, -60, 10, 1e-2);
  const auto xi = InitialSelection::constant(LatticeState::constant(3, 1.0));
  const auto obs = default_observables(100.0);

  for (const auto& r : invariance_study(m, path, 0.0, 20.0, 1.0, 0.0, xi, obs)) CHECK(r.residual == 0.0);

  // With t_step equal to the stride the pushed atoms are the later atoms shifted by one,
  // so only the dropped and the new atom differ.
  for (double W : {10.0, 20.0, 40.0}) {
    const auto rows = invariance_study(m, path, 0.0, W, 1.0, 1.0, xi, obs);
    for (std::size_t k = 0; k < rows.size(); ++k) CHECK(rows[k].residual <= 2.0 * obs[k].sup_bound() / W + 1e-9);
    CHECK(rows[0].residual <= 1e-14);
  }

  const auto a = build_measure(m, path, 0.0, -10.0, 1.0, xi);
  const auto b = build_measure(m, path, 2.0, -8.0, 1.0, xi);
  CHECK_THROWS_AS(invariance_residual(m, path, a, b, 1.0, obs, {}), ConfigError);
  CHECK_THROWS_AS(invariance_residual(m, path, a, a, -1.0, obs, {}), ConfigError);
  const auto other = NoisePath::sample(6, -60, 10, 1e-2);
  CHECK_THROWS_AS(invariance_residual(m, other, a, a, 0.0, obs, {}), ConfigError);
  const auto c = build_measure(m, path, 2.0, -10.0, 1.0, xi);
  CHECK_THROWS_AS(invariance_residual(m, path, a, c, 2.0, obs, {}), ConfigError);
}

TEST_CASE("invariance residual shrinks like 1/W") {
  const auto m = small_model();
  const auto obs = std::vector<Observable>{{Observable::Kind::ClippedNormSq, 100.0}};
  const auto xi = InitialSelection::constant(LatticeState::constant(3, 1.0));
  double ratio_sum = 0.0;
  const int seeds = 6;
  for (int s = 1; s <= seeds; ++s) {
    const auto path = NoisePath::sample(s, -200, 5, 1e-2);
    const double r50 = invariance_study(m, path, 0.0, 40.0, 1.0, 1.0, xi, obs)[0].residual;
    const double r160 = invariance_study(m, path, 0.0, 160.0, 1.0, 1.0, xi, obs)[0].residual;
    ratio_sum += r160 / std::max(r50, 1e-300);
  }
  CHECK(ratio_sum / seeds == doctest::Approx(0.25).epsilon(0.02));
}
