#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "slch/error.hpp"
#include "slch/format.hpp"
#include "slch/model.hpp"

namespace slch {

namespace {

// |x|^e with an exact product for small integer exponents, so that identities
// like x * |x|^3 == x^3 * sign hold bit-for-bit in the audit.
double abs_pow(double ax, double e) noexcept {
  if (e == std::floor(e) && e >= 0.0 && e <= 8.0) {
    double r = 1.0;
    for (int i = 0; i < static_cast<int>(e); ++i) r *= ax;
    return r;
  }
  return std::pow(ax, e);
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string("model parameter ") + name + " is not finite");
}

}  // namespace

double DecayProfile::operator()(int site) const {
  return amplitude * std::pow(1.0 + std::abs(site), -decay);
}

LatticeState DecayProfile::realize(int window_radius, Boundary b) const {
  return LatticeState::from_profile(window_radius, b, [this](int i) { return (*this)(i); });
}

std::string_view f_form_name(FForm f) noexcept {
  return f == FForm::SummableCubic ? "summable_cubic" : "classical_cubic";
}

std::string_view calculus_name(Calculus c) noexcept {
  return c == Calculus::Ito ? "ito" : "stratonovich";
}

void ModelSpec::realize(int window_radius, Boundary boundary) {
  if (f.form == FForm::ClassicalCubic) f.alpha1_profile.decay = 0.0;
  f.alpha1 = f.alpha1_profile.realize(window_radius, boundary);
  f.alpha2 = f.alpha2_profile.realize(window_radius, boundary);
  g.p = g.forcing_profile.realize(window_radius, boundary);
  h.c = h.profile.realize(window_radius, boundary);
}

ModelSpec ModelSpec::default_compliant(int window_radius, Boundary boundary, double k) {
  ModelSpec s;
  s.k = k;
  s.realize(window_radius, boundary);
  s.validate();
  return s;
}

void ModelSpec::validate() const {
  require_finite(lambda, "lambda");
  require_finite(k, "k");
  require_finite(q, "q");
  require_finite(epsilon, "epsilon");
  require_finite(beta, "beta");
  require_finite(lambda0, "lambda0");
  require_finite(lambda1, "lambda1");
  require_finite(h.nu, "h.nu");
  for (const DecayProfile* p : {&f.alpha1_profile, &f.alpha2_profile, &g.forcing_profile, &h.profile}) {
    require_finite(p->amplitude, "profile amplitude");
    require_finite(p->decay, "profile decay");
    if (p->decay < 0.0) throw ConfigError("profile decay must be >= 0");
  }
  if (k < 0.0) throw ConfigError("k must be >= 0");
  if (q <= 2.0) throw ConfigError("q must be > 2");
  if (epsilon <= 0.0) throw ConfigError("epsilon must be > 0");
  if (q - 1.0 - epsilon <= 0.0) throw ConfigError("q - 1 - epsilon must be > 0");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  const int r = window_radius();
  for (const LatticeState* s : {&f.alpha1, &f.alpha2, &g.p, &h.c}) {
    if (s->window_radius() != r || s->boundary() != boundary())
      throw ConfigError("model coefficient sequences have mismatched windows");
  }
  if (allow_noncompliant) return;

  if (!(beta > 0.0)) throw ConfigError("beta must be > 0 (set allow_noncompliant for exploratory runs)");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (!(0.0 < lambda1 && lambda1 < lambda0 && lambda0 < lambda))
    throw ConfigError("need 0 < lambda1 < lambda0 < lambda");
  if (f.form == FForm::ClassicalCubic)
    throw ConfigError("classical_cubic is theory-noncompliant (alpha1 not summable); set allow_noncompliant");
  if (std::abs(q - 1.0 - epsilon - 3.0) > 1e-12)
    throw ConfigError("summable_cubic requires q - 1 - epsilon = 3");
}

std::string model_to_json(const ModelSpec& s) {
  auto prof = [](const DecayProfile& p) {
    return nlohmann::json{{"amplitude", p.amplitude}, {"decay", p.decay}};
  };
  nlohmann::json j;
  j["lambda"] = s.lambda;
  j["k"] = s.k;
  j["q"] = s.q;
  j["epsilon"] = s.epsilon;
  j["beta"] = s.beta;
  j["lambda0"] = s.lambda0;
  j["lambda1"] = s.lambda1;
  j["calculus"] = calculus_name(s.calculus);
  j["allow_noncompliant"] = s.allow_noncompliant;
  j["f"] = {{"form", f_form_name(s.f.form)},
            {"alpha1", prof(s.f.alpha1_profile)},
            {"alpha2", prof(s.f.alpha2_profile)}};
  j["g"] = {{"forcing", prof(s.g.forcing_profile)}};
  j["h"] = {{"amplitude", s.h.profile.amplitude}, {"decay", s.h.profile.decay}, {"nu", s.h.nu}};
  j["window_radius"] = s.window_radius();
  j["boundary"] = boundary_name(s.boundary());
  return j.dump();
}

ModelSpec model_from_json(std::string_view text) {
  ModelSpec s;
  int radius = 32;
  Boundary b = Boundary::ZeroPad;
  try {
    const auto j = nlohmann::json::parse(text);
    auto num = [&](const char* key, double& out) {
      if (j.contains(key)) out = j.at(key).get<double>();
    };
    auto prof = [](const nlohmann::json& node, DecayProfile& p) {
      if (node.contains("amplitude")) p.amplitude = node.at("amplitude").get<double>();
      if (node.contains("decay")) p.decay = node.at("decay").get<double>();
    };
    static const char* known[] = {"lambda", "k", "q", "epsilon", "beta", "lambda0", "lambda1",
                                  "calculus", "allow_noncompliant", "f", "g", "h",
                                  "window_radius", "boundary"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find_if(std::begin(known), std::end(known),
                       [&](const char* k) { return it.key() == k; }) == std::end(known))
        throw ConfigError("unknown model key: " + it.key());
    }
    num("lambda", s.lambda);
    num("k", s.k);
    num("q", s.q);
    num("epsilon", s.epsilon);
    num("beta", s.beta);
    num("lambda0", s.lambda0);
    num("lambda1", s.lambda1);
    if (j.contains("calculus")) {
      const auto c = j.at("calculus").get<std::string>();
      if (c == "ito") s.calculus = Calculus::Ito;
      else if (c == "stratonovich") s.calculus = Calculus::Stratonovich;
      else throw ConfigError("unknown calculus: " + c);
    }
    if (j.contains("allow_noncompliant")) s.allow_noncompliant = j.at("allow_noncompliant").get<bool>();
    if (j.contains("f")) {
      const auto& f = j.at("f");
      if (f.contains("form")) {
        const auto form = f.at("form").get<std::string>();
        if (form == "summable_cubic") s.f.form = FForm::SummableCubic;
        else if (form == "classical_cubic") s.f.form = FForm::ClassicalCubic;
        else throw ConfigError("unknown f form: " + form);
      }
      if (f.contains("alpha1")) prof(f.at("alpha1"), s.f.alpha1_profile);
      if (f.contains("alpha2")) prof(f.at("alpha2"), s.f.alpha2_profile);
    }
    if (j.contains("g") && j.at("g").contains("forcing")) prof(j.at("g").at("forcing"), s.g.forcing_profile);
    if (j.contains("h")) {
      prof(j.at("h"), s.h.profile);
      if (j.at("h").contains("nu")) s.h.nu = j.at("h").at("nu").get<double>();
    }
    if (j.contains("window_radius")) radius = j.at("window_radius").get<int>();
    if (j.contains("boundary")) b = parse_boundary(j.at("boundary").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model JSON: ") + e.what());
  }
  if (radius < 1) throw ConfigError("window_radius must be >= 1");
  s.realize(radius, b);
  s.validate();
  return s;
}

std::string ModelSpec::hash() const { return hex64(fnv1a64(model_to_json(*this))); }

// Evaluation -------------------------------------------------------------------

double f_site(const ModelSpec& spec, std::size_t index, double x) noexcept {
  return spec.f.alpha1.values()[index] * (x * x * x);
}

double f_site_derivative(const ModelSpec& spec, std::size_t index, double x) noexcept {
  return 3.0 * spec.f.alpha1.values()[index] * (x * x);
}

double g_site(const ModelSpec& spec, std::size_t index, double t, double x) noexcept {
  return -spec.beta * x * abs_pow(std::abs(x), spec.q - 2.0) + spec.g.p.values()[index] * std::sin(t);
}

double g_site_derivative(const ModelSpec& spec, double x) noexcept {
  return -spec.beta * (spec.q - 1.0) * abs_pow(std::abs(x), spec.q - 2.0);
}

namespace span_ops {

void eval_f(const ModelSpec& spec, std::span<const double> u, std::span<double> out) {
  const double* a = spec.f.alpha1.values().data();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u[i];
    out[i] = a[i] * (x * x * x);
  }
}

void eval_g(const ModelSpec& spec, double t, std::span<const double> u, std::span<double> out) {
  const double st = std::sin(t);
  const double* p = spec.g.p.values().data();
  const double e = spec.q - 2.0;
  if (e == 3.0) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = u[i], ax = std::abs(x);
      out[i] = -spec.beta * x * (ax * ax * ax) + p[i] * st;
    }
    return;
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = -spec.beta * u[i] * abs_pow(std::abs(u[i]), e) + p[i] * st;
}

void eval_h(const ModelSpec& spec, double t, std::span<double> h, std::span<double> h_prime) {
  const double a = 1.0 + 0.5 * std::sin(spec.h.nu * t);
  const double b = 0.5 * spec.h.nu * std::cos(spec.h.nu * t);
  const double* c = spec.h.c.values().data();
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = c[i] * a;
    h_prime[i] = c[i] * b;
  }
}

}  // namespace span_ops

LatticeState eval_f(const ModelSpec& spec, const LatticeState& u) {
  require_same_shape(spec.f.alpha1, u, "eval_f");
  LatticeState out(u.window_radius(), u.boundary());
  span_ops::eval_f(spec, u.values(), out.mutable_values());
  return out;
}

LatticeState eval_g(const ModelSpec& spec, double t, const LatticeState& u) {
  require_same_shape(spec.g.p, u, "eval_g");
  LatticeState out(u.window_radius(), u.boundary());
  span_ops::eval_g(spec, t, u.values(), out.mutable_values());
  return out;
}

std::pair<LatticeState, LatticeState> eval_h(const ModelSpec& spec, double t) {
  LatticeState h(spec.window_radius(), spec.boundary());
  LatticeState hp(spec.window_radius(), spec.boundary());
  span_ops::eval_h(spec, t, h.mutable_values(), hp.mutable_values());
  return {std::move(h), std::move(hp)};
}

// Hypothesis constants ----------------------------------------------------------

double certified_beta(const ModelSpec& spec) noexcept { return 0.5 * spec.beta; }

double psi1_site(const ModelSpec& spec, std::size_t index, double t) noexcept {
  const double bh = certified_beta(spec);
  if (!(bh > 0.0)) return 0.0;
  const double q = spec.q;
  const double force = std::abs(spec.g.p.values()[index] * std::sin(t));
  return (q - 1.0) / q * std::pow(q * bh, -1.0 / (q - 1.0)) * std::pow(force, q / (q - 1.0));
}

double psi3_site(const ModelSpec& spec) noexcept { return spec.beta; }

double psi4_site(const ModelSpec& spec, std::size_t index, double t) noexcept {
  return std::abs(spec.g.p.values()[index] * std::sin(t));
}

double psi5_on_ball(const ModelSpec& spec, double radius) noexcept {
  return spec.beta * (spec.q - 1.0) * abs_pow(radius, spec.q - 2.0);
}

double q1_profile(const ModelSpec& spec, double t) {
  const double q = spec.q;
  double total = std::pow(lp_norm(spec.f.alpha1, 1.0), q / spec.epsilon) +
                 std::pow(lp_norm(spec.f.alpha2, 1.0), q / (q - 1.0));
  double psi1 = 0.0, psi4 = 0.0;
  for (std::size_t i = 0; i < spec.g.p.size(); ++i) {
    psi1 += psi1_site(spec, i, t);
    const double p4 = psi4_site(spec, i, t);
    psi4 += p4 * p4;
  }
  total += psi1 + psi4;
  auto [h, hp] = eval_h(spec, t);
  const double hq = lp_norm(h, q);
  const double h2 = norm(h), hp2 = norm(hp);
  total += (1.0 + std::pow(psi3_site(spec), q)) * std::pow(hq, q) + h2 * h2 + hp2 * hp2;
  return total;
}

}  // namespace slch
