#pragma once

// Truncated bi-infinite sequences and the sequence-space algebra on them:
// the second-difference operator A, the one-sided differences B and B*,
// the componentwise product, l^p norms and the smooth cut-off rho^N.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slch {

/// How neighbours outside the window are resolved.
enum class Boundary { ZeroPad, Periodic };

std::string_view boundary_name(Boundary b) noexcept;
Boundary parse_boundary(std::string_view name);

/// Finite window [-R, R] of a bi-infinite real sequence.
class LatticeState {
 public:
  LatticeState() : LatticeState(1) {}
  explicit LatticeState(int window_radius, Boundary boundary = Boundary::ZeroPad);
  LatticeState(int window_radius, Boundary boundary, std::vector<double> values);

  /// Fill with profile(i) for i in [-R, R].
  static LatticeState from_profile(int window_radius, Boundary boundary,
                                   const std::function<double(int)>& profile);
  static LatticeState unit_impulse(int window_radius, int site,
                                   Boundary boundary = Boundary::ZeroPad);
  static LatticeState constant(int window_radius, double value,
                               Boundary boundary = Boundary::ZeroPad);

  int window_radius() const noexcept { return radius_; }
  Boundary boundary() const noexcept { return boundary_; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Value at lattice site i in [-R, R].
  double at(int site) const;
  double& at(int site);
  std::size_t index_of(int site) const;
  int site_of(std::size_t index) const noexcept { return static_cast<int>(index) - radius_; }

  std::span<const double> values() const noexcept { return values_; }
  /// Raw access for kernels. Callers keep the entries finite.
  std::span<double> mutable_values() noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  bool same_shape(const LatticeState& other) const noexcept {
    return radius_ == other.radius_ && boundary_ == other.boundary_;
  }
  bool all_finite() const noexcept;

  LatticeState& operator+=(const LatticeState& rhs);
  LatticeState& operator-=(const LatticeState& rhs);
  LatticeState& operator*=(double s);

  friend LatticeState operator+(LatticeState lhs, const LatticeState& rhs) { return lhs += rhs; }
  friend LatticeState operator-(LatticeState lhs, const LatticeState& rhs) { return lhs -= rhs; }
  friend LatticeState operator*(double s, LatticeState v) { return v *= s; }
  friend LatticeState operator*(LatticeState v, double s) { return v *= s; }

  bool operator==(const LatticeState&) const = default;

 private:
  int radius_;
  Boundary boundary_;
  std::vector<double> values_;
};

/// Throws ConfigError unless a and b share window radius and boundary.
void require_same_shape(const LatticeState& a, const LatticeState& b, std::string_view what);

// Operators -----------------------------------------------------------------

LatticeState apply_A(const LatticeState& u);
LatticeState apply_A2(const LatticeState& u);
LatticeState apply_B(const LatticeState& u);
LatticeState apply_Bstar(const LatticeState& u);
LatticeState hadamard(const LatticeState& u, const LatticeState& v);

/// (u, v) = sum_i u_i v_i, compensated.
double inner(const LatticeState& u, const LatticeState& v);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// l^p norm for p >= 1 or p = kInfNorm. Throws DomainError for p < 1.
double lp_norm(const LatticeState& u, double p);
/// l^2 norm.
double norm(const LatticeState& u);

/// In-place building blocks used by the integrators (no shape checks).
namespace span_ops {
void apply_A(std::span<const double> in, std::span<double> out, Boundary b);
/// A(A in); tmp must have in.size() entries and differ from out.
void apply_A2(std::span<const double> in, std::span<double> tmp, std::span<double> out,
              Boundary b);
double dot(std::span<const double> a, std::span<const double> b);
double sum_sq(std::span<const double> a);
double max_abs(std::span<const double> a);
}  // namespace span_ops

// Cut-off ---------------------------------------------------------------------

/// The cubic smoothstep: 0 on [0,1], 3x^2 - 2x^3 with x = s - 1 on [1,2], 1 beyond.
double cutoff_profile(double s) noexcept;
double cutoff_profile_derivative(double s) noexcept;
inline constexpr double kCutoffDerivativeBound = 1.5;

struct CutoffVector {
  int N = 3;
  LatticeState values;
  double derivative_bound = kCutoffDerivativeBound;
  /// 2N exceeds the window, so the plateau rho = 1 is not represented.
  bool clipped = false;
};

/// rho^N_i = rho(|i|/N) on the given window. Throws DomainError for N < 3.
CutoffVector make_cutoff(int N, int window_radius, Boundary boundary = Boundary::ZeroPad);

// Serialization ----------------------------------------------------------------

/// {"window_radius": R, "boundary": "...", "values": [...]}
std::string to_json(const LatticeState& u);
LatticeState lattice_from_json(std::string_view text);
/// Header "site_-R,...,site_R" then one row per state.
void write_csv(std::ostream& os, std::span<const LatticeState> states);

}  // namespace slch
