#pragma once

// Two-sided Wiener sample paths on a uniform grid, the Wiener shift theta_s,
// and the stationary Ornstein-Uhlenbeck observable z(theta_t omega) solving
// dz + z dt = dW.
//
// A path owns, per grid step, the Brownian increment and one independent
// standard normal "innovation". The innovation carries the part of the
// exact OU step that is independent of the increment, so z is a pathwise
// functional of the sample and every scheme step (fine or coarse) sees the
// same Brownian motion.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace slch {

class NoisePath {
 public:
  /// Fresh path on [t_min, t_max] with step dt. Throws ConfigError when
  /// t_min < 0 < t_max fails or either endpoint is not a multiple of dt.
  static NoisePath sample(std::uint64_t seed, double t_min, double t_max, double dt);

  /// Path from given increments (and optional OU innovations / initial OU value).
  static NoisePath from_increments(double t_min, double dt, std::vector<double> increments,
                                   std::vector<double> innovations = {}, double z_start = 0.0,
                                   std::uint64_t seed = 0);

  double dt() const noexcept;
  std::uint64_t seed() const noexcept;
  std::size_t steps() const noexcept;
  /// Index of time 0 in the grid arrays.
  std::int64_t anchor() const noexcept { return anchor_; }
  double t_min() const noexcept;
  double t_max() const noexcept;

  /// Time of grid node n (0 <= n <= steps()); computed from integer offsets.
  double time_at(std::size_t n) const noexcept;
  /// Exact grid node of time t; SpanError when off-grid or outside the span.
  std::size_t index_of(double t) const;
  /// Grid node for an integer multiple m of dt.
  std::size_t index_of_multiple(std::int64_t m) const;
  bool contains(double t) const noexcept;

  /// W at grid node n, anchored so that W(0) = 0 exactly.
  double W(std::size_t n) const noexcept;
  std::vector<double> W_values() const;
  /// W(node n1) - W(node n0).
  double increment_between(std::size_t n0, std::size_t n1) const noexcept;
  std::span<const double> increments() const noexcept;
  std::span<const double> innovations() const noexcept;
  double z_start() const noexcept;

  /// OU values from the stationary initial draw, computed once per sample.
  std::shared_ptr<const std::vector<double>> stationary_z() const;

  /// Same underlying sample (data shared, not copied).
  bool shares_sample_with(const NoisePath& other) const noexcept { return data_ == other.data_; }

  struct Data;

 private:
  NoisePath(std::shared_ptr<const Data> data, std::int64_t anchor)
      : data_(std::move(data)), anchor_(anchor) {}
  friend NoisePath shift_path(const NoisePath& path, double s);

  std::shared_ptr<const Data> data_;
  std::int64_t anchor_;
};

/// theta_s omega: (theta_s omega)(r) = omega(r + s) - omega(s) on [t_min - s, t_max - s].
/// s must be a multiple of dt with t_min < s < t_max, else SpanError carrying the admissible range.
NoisePath shift_path(const NoisePath& path, double s);

enum class OuInit { Stationary, BurnIn };

/// Samples of z(theta_t omega) aligned with the grid of a path.
struct OuSamples {
  NoisePath path;
  std::shared_ptr<const std::vector<double>> z;
  /// First grid node whose value belongs to the usable span.
  std::size_t valid_from = 0;
  double burn_in = 0.0;
  OuInit init = OuInit::Stationary;

  /// Grid value; SpanError before valid_from.
  double at_index(std::size_t n) const;
  /// Value at a grid time, or the linear interpolant between grid nodes.
  double at(double t) const;
  double usable_t_min() const noexcept { return path.time_at(valid_from); }

  /// Arbitrary values on the path grid (used for synthetic checks).
  static OuSamples synthetic(const NoisePath& path, std::vector<double> values);
};

/// Exact OU recursion driven by the path. burn_in = 0 starts from the stationary
/// draw stored in the path; burn_in > 0 starts from 0 at t_min and declares
/// [t_min + burn_in, t_max] usable.
OuSamples ou_from_path(const NoisePath& path, double burn_in = 0.0);

struct SublinearityRow {
  double t;
  double z_over_t;
  double mean_over_t;  // (1/t) * integral_0^t z ds (trapezoid)
};

/// Ratios at geometrically spaced |t| = t0 * 2^k, both signs where the span allows.
std::vector<SublinearityRow> sublinearity_report(const OuSamples& ou, double t0 = 1.0);

/// "# seed=..., dt=..., burn_in=..., init=..." header, then t,W,z rows.
void write_path_csv(std::ostream& os, const OuSamples& ou);

std::string_view ou_init_name(OuInit init) noexcept;

}  // namespace slch
