#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <random>

#include "slch/model.hpp"

namespace slch {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Tracks the smallest (bound - lhs) seen, with a few ulps of slack so that
// identities that hold exactly in real arithmetic are not failed by rounding.
struct Margin {
  double worst = std::numeric_limits<double>::infinity();
  void observe(double bound, double lhs) {
    const double slack = 16.0 * kEps * (std::abs(bound) + std::abs(lhs));
    worst = std::min(worst, bound - lhs + slack);
  }
  double value() const { return std::isfinite(worst) ? worst : 0.0; }
};

AuditEntry entry(std::string hyp, std::string check, double margin, std::string note = {}) {
  AuditEntry e;
  e.hypothesis = std::move(hyp);
  e.check = std::move(check);
  e.worst_margin = margin;
  e.passed = margin >= 0.0;
  e.note = std::move(note);
  return e;
}

// Margin of the decay law against the l^p threshold 1/p.
double lp_margin(const DecayProfile& p, double exponent) {
  if (p.amplitude == 0.0) return 0.0;
  return p.decay * exponent - 1.0;
}

}  // namespace

bool AuditReport::all_passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const AuditEntry& e) { return e.passed; });
}

const AuditEntry* AuditReport::find(std::string_view hypothesis, std::string_view check) const {
  for (const auto& e : entries)
    if (e.hypothesis == hypothesis && e.check == check) return &e;
  return nullptr;
}

std::string AuditReport::to_json() const {
  nlohmann::json j;
  j["n_samples"] = n_samples;
  j["radius"] = radius;
  j["all_passed"] = all_passed();
  auto& arr = j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"hypothesis", e.hypothesis},
                   {"check", e.check},
                   {"worst_margin", e.worst_margin},
                   {"passed", e.passed},
                   {"note", e.note}});
  }
  return j.dump(2);
}

AuditReport hypothesis_audit(const ModelSpec& spec, std::size_t n_samples, double radius,
                             std::uint64_t seed, double t_window) {
  AuditReport rep;
  rep.n_samples = n_samples;
  rep.radius = radius;
  const std::size_t n = spec.f.alpha1.size();
  const double q = spec.q;
  const double growth_exp = q - 1.0 - spec.epsilon;
  const double beta_h = certified_beta(spec);
  double alpha1_max = 0.0;
  for (double a : spec.f.alpha1.values()) alpha1_max = std::max(alpha1_max, std::abs(a));
  const double gamma_r = 3.0 * alpha1_max * radius * radius;
  const double psi5 = psi5_on_ball(spec, radius);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Margin f_growth, f_lip, g_diss, g_deriv, g_growth, g3_ball, h_bound, hp_bound;
  const double c_norm = norm(spec.h.c);

  auto check_site = [&](std::size_t i, double t, double x, double y) {
    const double ax = std::abs(x);
    const double fx = f_site(spec, i, x);
    f_growth.observe(spec.f.alpha1.values()[i] * std::pow(ax, growth_exp) + spec.f.alpha2.values()[i],
                     std::abs(fx));
    if (x != y)
      f_lip.observe(gamma_r * std::abs(x - y), std::abs(fx - f_site(spec, i, y)));
    const double gx = g_site(spec, i, t, x);
    g_diss.observe(-beta_h * std::pow(ax, q) + psi1_site(spec, i, t), gx * x);
    const double dg = g_site_derivative(spec, x);
    g_deriv.observe(0.0, dg);
    g_growth.observe(psi3_site(spec) * std::pow(ax, q - 1.0) + psi4_site(spec, i, t), std::abs(gx));
    if (ax <= radius) g3_ball.observe(psi5, std::abs(dg));
  };

  std::vector<double> u(n), w(n);
  auto ball_point = [&](std::vector<double>& out) {
    double s = 0.0;
    for (auto& v : out) {
      v = normal(rng);
      s += v * v;
    }
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    const double scale = s > 0.0 ? r / std::sqrt(s) : 0.0;
    for (auto& v : out) v *= scale;
  };
  for (std::size_t s = 0; s < n_samples; ++s) {
    ball_point(u);
    ball_point(w);
    const double t = t_window * (2.0 * unit(rng) - 1.0);
    for (std::size_t i = 0; i < n; ++i) check_site(i, t, u[i], w[i]);
    auto [h, hp] = eval_h(spec, t);
    h_bound.observe(1.5 * c_norm, norm(h));
    hp_bound.observe(0.5 * std::abs(spec.h.nu) * c_norm, norm(hp));
  }
  // Ball samples in high dimension rarely reach |x_i| ~ radius; sweep each site
  // over the full scalar range as well.
  const int sweep = 64;
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j <= sweep; ++j) {
      const double x = radius * (2.0 * j / sweep - 1.0);
      const double y = radius * (2.0 * unit(rng) - 1.0);
      check_site(i, t_window * (2.0 * unit(rng) - 1.0), x, y);
    }
  }

  rep.entries.push_back(entry("F", "growth", f_growth.value(), "|f_i(x)| <= alpha1_i |x|^(q-1-eps) + alpha2_i"));
  rep.entries.push_back(entry("F", "local_lipschitz", f_lip.value(), "gamma(R) = 3 max(alpha1) R^2 on the ball"));
  {
    double m = std::min(lp_margin(spec.f.alpha1_profile, 1.0), lp_margin(spec.f.alpha2_profile, 1.0));
    if (spec.f.form == FForm::ClassicalCubic) m = std::min(m, -1.0);
    rep.entries.push_back(entry("F", "summability", m,
                                spec.f.form == FForm::ClassicalCubic
                                    ? "constant coefficient is not in l^1"
                                    : "alpha1, alpha2 in l^1 from the decay law"));
  }
  rep.entries.push_back(entry("G1", "dissipativity", g_diss.value(),
                              "g x <= -(beta/2) |x|^q + psi_1, psi_1 from Young's inequality"));
  rep.entries.push_back(entry("G1", "derivative", g_deriv.value(), "dg/dx <= psi_2 = 0"));
  rep.entries.push_back(entry("G1", "growth", g_growth.value(), "|g| <= psi_3 |x|^(q-1) + psi_4"));
  rep.entries.push_back(entry("G1", "integrability",
                              std::min(lp_margin(spec.g.forcing_profile, q / (q - 1.0)),
                                       lp_margin(spec.g.forcing_profile, 2.0)),
                              "psi_1 in l^1 and psi_4 in l^2 uniformly in t"));
  {
    // Bounded integrands against exp(lambda1 s): the weighted integral is at
    // most sup / lambda1, finite iff the sequences are summable and lambda1 > 0.
    double m = std::min(lp_margin(spec.g.forcing_profile, q / (q - 1.0)), lp_margin(spec.g.forcing_profile, 2.0));
    if (!(spec.lambda1 > 0.0)) m = std::min(m, -1.0);
    rep.entries.push_back(entry("G2", "weighted_integral", m, "closed form: sup(|psi_1|_1 + |psi_4|^2) / lambda1"));
  }
  rep.entries.push_back(entry("G3", "bounded_ball", g3_ball.value(),
                              "|dg/dx| <= beta (q-1) R^(q-2) on the audit ball only"));
  rep.entries.push_back(entry("H1", "regularity",
                              std::min(lp_margin(spec.h.profile, 2.0), lp_margin(spec.h.profile, q)),
                              "c in l^2 and l^q from the decay law"));
  rep.entries.push_back(entry("H1", "pointwise_bound", std::min(h_bound.value(), hp_bound.value()),
                              "|h(t)| <= 1.5 |c|, |h'(t)| <= (nu/2) |c|"));
  {
    double m = lp_margin(spec.h.profile, 2.0);
    if (!(spec.lambda1 > 0.0)) m = std::min(m, -1.0);
    rep.entries.push_back(entry("H2", "weighted_integral", m, "closed form: sup(|h|^2 + |h|_q^q + |h'|^2) / lambda1"));
  }
  {
    double m = std::min({q - 2.0, spec.epsilon, growth_exp, spec.beta, spec.lambda1,
                         spec.lambda0 - spec.lambda1, spec.lambda - spec.lambda0});
    if (spec.f.form == FForm::SummableCubic && std::abs(growth_exp - 3.0) > 1e-12)
      m = std::min(m, -std::abs(growth_exp - 3.0));
    if (spec.beta == 0.0) m = std::min(m, -1.0);
    rep.entries.push_back(entry("params", "inequalities", m,
                                "q > 2, eps > 0, q-1-eps > 0, beta > 0, 0 < lambda1 < lambda0 < lambda"));
  }
  return rep;
}

}  // namespace slch
