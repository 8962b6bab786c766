#pragma once

// Cylindrical test functions Psi(u) = psi((u,e_1), ..., (u,e_m)), Ito-formula
// residuals along Euler-Maruyama trajectories, and the stochastic Liouville
// balance evaluated on time-averaged sample measures.

#include <span>
#include <string>
#include <vector>

#include "slch/dynamics.hpp"
#include "slch/measures.hpp"

namespace slch {

/// Scalar factor of a product test function, with closed-form derivatives.
struct Profile1D {
  enum class Kind {
    Bump,           // (1 - s^2)^3 on |s| < 1, s = (x - center) / radius
    LinearPlateau,  // x on |x| <= radius, smoothly cut to 0 by 2 radius
    Constant,       // center (the value), derivatives 0
  };
  Kind kind = Kind::Bump;
  double center = 0.0;
  double radius = 1.0;

  double value(double x) const noexcept;
  double d1(double x) const noexcept;
  double d2(double x) const noexcept;
};

class CylindricalTestFunction {
 public:
  CylindricalTestFunction(std::string name, std::vector<LatticeState> basis, std::vector<Profile1D> profiles);

  /// psi = prod of bumps with the given radius, e_k = unit impulses at the sites.
  static CylindricalTestFunction bump(const std::vector<int>& sites, int window_radius, Boundary b,
                                      double radius);
  /// One bump along a smooth normalized direction exp(-i^2 / (2 w^2)).
  static CylindricalTestFunction smooth_bump(int window_radius, Boundary b, double width, double radius);
  static CylindricalTestFunction linear(int site, int window_radius, Boundary b, double radius);
  static CylindricalTestFunction constant(double value, int window_radius, Boundary b);

  const std::string& name() const noexcept { return name_; }
  std::size_t m() const noexcept { return basis_.size(); }
  const std::vector<LatticeState>& basis() const noexcept { return basis_; }
  bool is_constant() const noexcept;

  double eval(const LatticeState& u) const;
  LatticeState grad(const LatticeState& u) const;
  double hess(const LatticeState& u, const LatticeState& v, const LatticeState& w) const;
  /// sup |Psi|.
  double sup_bound() const;

  /// Partial derivatives of psi at the coordinates x_k = (u, e_k).
  void partials(std::span<const double> x, double& value, std::vector<double>& d1,
                std::vector<double>& d2) const;
  /// x_k = (u, e_k).
  void coordinates(std::span<const double> u, std::vector<double>& x) const;

 private:
  std::string name_;
  std::vector<LatticeState> basis_;
  std::vector<Profile1D> profiles_;
};

/// The three default test functions used in residual studies.
std::vector<CylindricalTestFunction> default_test_functions(int window_radius, Boundary b, double radius);

struct ItoTerms {
  double residual = 0.0;
  double bracket = 0.0;     // Psi(u(t)) - Psi(u(sigma))
  double drift = 0.0;       // sum <F, Psi'> dt
  double stochastic = 0.0;  // sum (G, Psi') dW
  double correction = 0.0;  // sum Psi''(G, G) dt / 2
};

/// Left-point sums on an Euler-Maruyama trajectory recorded at every step.
ItoTerms ito_residual(const ModelSpec& spec, const NoisePath& path, const Trajectory& traj,
                      const CylindricalTestFunction& tf, double sigma, double t);

// Liouville balance -------------------------------------------------------------

struct LiouvilleConfig {
  double tau = 0.0;
  double s = 0.0;
  double t = 10.0;
  double window = 50.0;        // W: mu_sigma averages starts in [sigma - W, sigma)
  double start_spacing = 1.0;  // spacing of the start grid
  SchemeConfig scheme;
  InitialSelection xi;
  unsigned workers = 0;
};

/// Aggregates of one test function against mu_sigma at every node sigma_i.
struct TestFunctionSeries {
  std::string name;
  double sup_psi = 0.0;
  std::vector<double> psi;         // int Psi dmu
  std::vector<double> drift;       // int <F, Psi'> dmu
  std::vector<double> diffusion;   // int (G, Psi') dmu
  std::vector<double> correction;  // int Psi''(G,G)/2 dmu
  std::vector<double> bound;       // int [(16+lambda)|u| + 4|f(u)|_1 + |g|] |Psi'| dmu
  std::size_t atom_bound_violations = 0;
  std::vector<double> basis_drift_max;  // max_i |int (F, e_k) dmu|
  std::vector<double> basis_diff_max;   // max_i |int (G, e_k) dmu|
};

struct MeasureSeries {
  std::vector<double> times;  // sigma_i on the scheme grid, s = sigma_0, t = sigma_last
  std::vector<double> dW;     // W~(sigma_{i+1}) - W~(sigma_i)
  double dt = 0.0;
  std::size_t atoms_per_measure = 0;
  double window = 0.0;
  std::vector<TestFunctionSeries> functions;
};

/// Streams every start-grid trajectory on theta_{-tau} w and accumulates the
/// integrals; mu_sigma never has to be stored.
MeasureSeries liouville_series(const ModelSpec& spec, const NoisePath& path, const LiouvilleConfig& cfg,
                               const std::vector<CylindricalTestFunction>& tfs);

/// Same aggregates from explicit measures (one per node; e.g. synthetic families).
MeasureSeries series_from_measures(const ModelSpec& spec, const std::vector<double>& times,
                                   const std::vector<double>& dW, const std::vector<EmpiricalMeasure>& measures,
                                   const std::vector<CylindricalTestFunction>& tfs);

struct LiouvilleResidual {
  std::string test_function;
  double s = 0.0, t = 0.0;
  double residual = 0.0;
  double relative = 0.0;  // |residual| / (sum of |terms| + 1e-12)
  double bracket = 0.0, drift = 0.0, stochastic = 0.0, correction = 0.0;
};

/// Balance over nodes [i0, i1] of the series.
LiouvilleResidual liouville_residual(const MeasureSeries& series, std::size_t tf, std::size_t i0, std::size_t i1);
LiouvilleResidual liouville_residual(const MeasureSeries& series, std::size_t tf);

struct StatSolutionEntry {
  std::string test_function;
  double continuity_modulus = 0.0;  // max |int Psi dmu_{i+1} - int Psi dmu_i|
  /// Envelope for the modulus: 2 sqrt(2 dt log(1/dt)) sup|int (G,Psi') dmu| + (sup|drift| + sup|corr|) dt
  /// + 2 sup|Psi| / atoms (one atom enters, one leaves) + 0.05 sup|Psi|.
  double continuity_envelope = 0.0;
  bool continuity_ok = false;
  double drift_sup = 0.0;
  double diffusion_sup = 0.0;
  bool integrability_ok = false;  // finite sups
  bool bound_ok = false;          // drift integrals under the per-atom bound
  LiouvilleResidual liouville;
  bool liouville_ok = false;
};

struct StatSolutionReport {
  std::vector<StatSolutionEntry> entries;
  bool all_passed() const;
};

StatSolutionReport statistical_solution_checks(const MeasureSeries& series, double liouville_tolerance = 0.05);

}  // namespace slch
