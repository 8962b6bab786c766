#pragma once

// Parametric nonlinearities f, g and forcing h of the lattice Cahn-Hilliard
// system
//
//   du = -[A(Au + f(u)) + lambda u - g(t,u)] dt + (k u + h(t)) dW,
//
// together with the hypothesis constants (alpha, psi_1..psi_5) each family
// satisfies and an audit that checks them numerically.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slch/lattice.hpp"

namespace slch {

/// a * (1 + |i|)^(-decay), the coefficient profile used by every family.
struct DecayProfile {
  double amplitude = 1.0;
  double decay = 2.0;

  double operator()(int site) const;
  LatticeState realize(int window_radius, Boundary b) const;
  /// Membership of the infinite sequence in l^p (decided from the decay law).
  bool in_lp(double p) const { return amplitude == 0.0 || decay * p > 1.0; }
};

enum class FForm {
  SummableCubic,   // f_i(x) = alpha1_i x^3, alpha1 summable; needs q - 1 - eps = 3
  ClassicalCubic,  // f_i(x) = x^3 (alpha1 = 1 on every site, not summable)
};

struct FFamily {
  FForm form = FForm::SummableCubic;
  DecayProfile alpha1_profile{1.0, 2.0};
  DecayProfile alpha2_profile{0.0, 2.0};
  LatticeState alpha1;
  LatticeState alpha2;
};

/// g_i(t, x) = -beta x |x|^(q-2) + p_i sin(t).
struct GFamily {
  DecayProfile forcing_profile{1.0, 2.0};
  LatticeState p;
};

/// h_i(t) = c_i (1 + sin(nu t) / 2), h'_i(t) = c_i (nu / 2) cos(nu t).
struct HFamily {
  DecayProfile profile{1.0, 2.0};
  double nu = 1.0;
  LatticeState c;
};

/// Interpretation of the multiplicative noise k u dW in the conjugated drift.
enum class Calculus { Ito, Stratonovich };

struct ModelSpec {
  double lambda = 1.0;
  double k = 0.5;
  double q = 5.0;
  double epsilon = 1.0;
  double beta = 1.0;
  double lambda0 = 0.75;
  double lambda1 = 0.5;
  FFamily f;
  GFamily g;
  HFamily h;
  Calculus calculus = Calculus::Ito;
  /// Skip the parameter inequalities (exploratory, theory-noncompliant runs).
  bool allow_noncompliant = false;

  int window_radius() const noexcept { return f.alpha1.window_radius(); }
  Boundary boundary() const noexcept { return f.alpha1.boundary(); }
  bool additive_noise() const noexcept { return k == 0.0; }

  /// Throws ConfigError on violated parameter inequalities.
  void validate() const;

  /// Rebuild the per-site sequences from the profiles for a new window.
  void realize(int window_radius, Boundary boundary);

  /// Default compliant model: q=5, eps=1, beta=1, lambda=1, lambda0=0.75,
  /// lambda1=0.5, coefficient decay (1+|i|)^-2.
  static ModelSpec default_compliant(int window_radius, Boundary boundary = Boundary::ZeroPad,
                                     double k = 0.5);

  /// Stable hash of the canonical JSON form.
  std::string hash() const;
};

std::string model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(std::string_view text);

std::string_view f_form_name(FForm f) noexcept;
std::string_view calculus_name(Calculus c) noexcept;

// Componentwise evaluation -----------------------------------------------------

double f_site(const ModelSpec& spec, std::size_t index, double x) noexcept;
double f_site_derivative(const ModelSpec& spec, std::size_t index, double x) noexcept;
double g_site(const ModelSpec& spec, std::size_t index, double t, double x) noexcept;
double g_site_derivative(const ModelSpec& spec, double x) noexcept;

LatticeState eval_f(const ModelSpec& spec, const LatticeState& u);
LatticeState eval_g(const ModelSpec& spec, double t, const LatticeState& u);
/// (h(t), h'(t)).
std::pair<LatticeState, LatticeState> eval_h(const ModelSpec& spec, double t);

namespace span_ops {
void eval_f(const ModelSpec& spec, std::span<const double> u, std::span<double> out);
void eval_g(const ModelSpec& spec, double t, std::span<const double> u, std::span<double> out);
void eval_h(const ModelSpec& spec, double t, std::span<double> h, std::span<double> h_prime);
}  // namespace span_ops

// Hypothesis constants of the built-in families -------------------------------

/// Dissipation constant certified in the sign condition g x <= -beta_H |x|^q + psi_1:
/// half of beta, the other half absorbs the forcing through Young's inequality.
double certified_beta(const ModelSpec& spec) noexcept;
double psi1_site(const ModelSpec& spec, std::size_t index, double t) noexcept;
double psi3_site(const ModelSpec& spec) noexcept;
double psi4_site(const ModelSpec& spec, std::size_t index, double t) noexcept;
/// Bound for |dg/dx| on the ball |x| <= radius.
double psi5_on_ball(const ModelSpec& spec, double radius) noexcept;

/// The forcing aggregate Q_1(t) of the energy estimate (without its constant c).
double q1_profile(const ModelSpec& spec, double t);

// Audit ----------------------------------------------------------------------

struct AuditEntry {
  std::string hypothesis;  // "F", "G1", ...
  std::string check;       // what was checked
  double worst_margin = 0.0;
  bool passed = true;
  std::string note;
};

struct AuditReport {
  std::vector<AuditEntry> entries;
  std::size_t n_samples = 0;
  double radius = 0.0;
  bool all_passed() const;
  const AuditEntry* find(std::string_view hypothesis, std::string_view check) const;
  std::string to_json() const;
};

/// Samples states uniformly in the l^2 ball of the given radius and times in
/// [-t_window, t_window]; checks every pointwise hypothesis inequality and the
/// closed-form bounds for the weighted time integrals. Failures are entries.
AuditReport hypothesis_audit(const ModelSpec& spec, std::size_t n_samples, double radius,
                             std::uint64_t seed = 0, double t_window = 10.0);

}  // namespace slch
