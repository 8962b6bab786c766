#include "slch/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "slch/error.hpp"
#include "slch/simd.hpp"

namespace slch {

std::string_view boundary_name(Boundary b) noexcept {
  return b == Boundary::Periodic ? "periodic" : "zero_pad";
}

Boundary parse_boundary(std::string_view name) {
  if (name == "zero_pad" || name == "ZeroPad" || name == "zeropad") return Boundary::ZeroPad;
  if (name == "periodic" || name == "Periodic") return Boundary::Periodic;
  throw ConfigError("unknown boundary policy '" + std::string(name) + "'");
}

LatticeState::LatticeState(int window_radius, Boundary boundary)
    : radius_(window_radius), boundary_(boundary) {
  if (window_radius < 1) throw ConfigError("window_radius must be >= 1");
  values_.assign(static_cast<std::size_t>(2 * window_radius + 1), 0.0);
}

LatticeState::LatticeState(int window_radius, Boundary boundary, std::vector<double> values)
    : radius_(window_radius), boundary_(boundary), values_(std::move(values)) {
  if (window_radius < 1) throw ConfigError("window_radius must be >= 1");
  if (values_.size() != static_cast<std::size_t>(2 * window_radius + 1)) {
    throw ConfigError("lattice state needs 2*R+1 = " + std::to_string(2 * window_radius + 1) +
                      " values, got " + std::to_string(values_.size()));
  }
  if (!all_finite()) throw ConfigError("lattice state values must be finite");
}

LatticeState LatticeState::from_profile(int window_radius, Boundary boundary,
                                        const std::function<double(int)>& profile) {
  LatticeState s(window_radius, boundary);
  for (int i = -window_radius; i <= window_radius; ++i) s.at(i) = profile(i);
  if (!s.all_finite()) throw ConfigError("profile produced non-finite values");
  return s;
}

LatticeState LatticeState::unit_impulse(int window_radius, int site, Boundary boundary) {
  LatticeState s(window_radius, boundary);
  s.at(site) = 1.0;
  return s;
}

LatticeState LatticeState::constant(int window_radius, double value, Boundary boundary) {
  LatticeState s(window_radius, boundary);
  std::fill(s.values_.begin(), s.values_.end(), value);
  return s;
}

std::size_t LatticeState::index_of(int site) const {
  if (site < -radius_ || site > radius_) {
    throw ConfigError("site " + std::to_string(site) + " outside window [-" +
                      std::to_string(radius_) + ", " + std::to_string(radius_) + "]");
  }
  return static_cast<std::size_t>(site + radius_);
}

double LatticeState::at(int site) const { return values_[index_of(site)]; }
double& LatticeState::at(int site) { return values_[index_of(site)]; }

bool LatticeState::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

LatticeState& LatticeState::operator+=(const LatticeState& rhs) {
  require_same_shape(*this, rhs, "addition");
  simd::kernels().lincomb(1.0, values_.data(), 1.0, rhs.values_.data(), values_.data(),
                          values_.size());
  return *this;
}

LatticeState& LatticeState::operator-=(const LatticeState& rhs) {
  require_same_shape(*this, rhs, "subtraction");
  simd::kernels().lincomb(1.0, values_.data(), -1.0, rhs.values_.data(), values_.data(),
                          values_.size());
  return *this;
}

LatticeState& LatticeState::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

void require_same_shape(const LatticeState& a, const LatticeState& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw ConfigError(std::string(what) + ": window mismatch (R=" +
                      std::to_string(a.window_radius()) + "/" + std::string(boundary_name(a.boundary())) +
                      " vs R=" + std::to_string(b.window_radius()) + "/" +
                      std::string(boundary_name(b.boundary())) + ")");
  }
}

namespace span_ops {

void apply_A(std::span<const double> in, std::span<double> out, Boundary b) {
  simd::kernels().stencil_a(in.data(), out.data(), in.size(), b == Boundary::Periodic);
}

void apply_A2(std::span<const double> in, std::span<double> tmp, std::span<double> out,
              Boundary b) {
  const auto& k = simd::kernels();
  const bool periodic = b == Boundary::Periodic;
  k.stencil_a(in.data(), tmp.data(), in.size(), periodic);
  k.stencil_a(tmp.data(), out.data(), in.size(), periodic);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return simd::kernels().dot(a.data(), b.data(), a.size());
}

double sum_sq(std::span<const double> a) { return simd::kernels().sum_sq(a.data(), a.size()); }

double max_abs(std::span<const double> a) { return simd::kernels().max_abs(a.data(), a.size()); }

}  // namespace span_ops

LatticeState apply_A(const LatticeState& u) {
  LatticeState out(u.window_radius(), u.boundary());
  span_ops::apply_A(u.values(), out.mutable_values(), u.boundary());
  return out;
}

LatticeState apply_A2(const LatticeState& u) {
  LatticeState tmp(u.window_radius(), u.boundary());
  LatticeState out(u.window_radius(), u.boundary());
  span_ops::apply_A2(u.values(), tmp.mutable_values(), out.mutable_values(), u.boundary());
  return out;
}

LatticeState apply_B(const LatticeState& u) {
  LatticeState out(u.window_radius(), u.boundary());
  simd::kernels().diff_forward(u.values().data(), out.mutable_values().data(), u.size(),
                               u.boundary() == Boundary::Periodic);
  return out;
}

LatticeState apply_Bstar(const LatticeState& u) {
  LatticeState out(u.window_radius(), u.boundary());
  simd::kernels().diff_backward(u.values().data(), out.mutable_values().data(), u.size(),
                                u.boundary() == Boundary::Periodic);
  return out;
}

LatticeState hadamard(const LatticeState& u, const LatticeState& v) {
  require_same_shape(u, v, "hadamard");
  LatticeState out(u.window_radius(), u.boundary());
  simd::kernels().mul(u.values().data(), v.values().data(), out.mutable_values().data(),
                      u.size());
  return out;
}

double inner(const LatticeState& u, const LatticeState& v) {
  require_same_shape(u, v, "inner product");
  return span_ops::dot(u.values(), v.values());
}

double lp_norm(const LatticeState& u, double p) {
  if (std::isnan(p) || p < 1.0) throw DomainError("lp_norm requires p >= 1 (got " + std::to_string(p) + ")");
  const auto& k = simd::kernels();
  const auto vals = u.values();
  if (std::isinf(p)) return k.max_abs(vals.data(), vals.size());
  if (p == 1.0) return k.sum_abs(vals.data(), vals.size());
  const double m = k.max_abs(vals.data(), vals.size());
  if (m == 0.0) return 0.0;
  if (p == 2.0 && m < 1e150 && m > 1e-150) return std::sqrt(k.sum_sq(vals.data(), vals.size()));
  // Scale by the max entry so that |u_i|^p neither overflows nor underflows.
  double sum = 0.0;
  double comp = 0.0;
  for (double v : vals) {
    const double term = std::pow(std::fabs(v) / m, p) - comp;
    const double t = sum + term;
    comp = (t - sum) - term;
    sum = t;
  }
  return m * std::pow(sum, 1.0 / p);
}

double norm(const LatticeState& u) { return lp_norm(u, 2.0); }

double cutoff_profile(double s) noexcept {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double x = s - 1.0;
  return x * x * (3.0 - 2.0 * x);
}

double cutoff_profile_derivative(double s) noexcept {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double x = s - 1.0;
  return 6.0 * x * (1.0 - x);
}

CutoffVector make_cutoff(int N, int window_radius, Boundary boundary) {
  if (N < 3) throw DomainError("cut-off index N must be >= 3 (got " + std::to_string(N) + ")");
  CutoffVector c;
  c.N = N;
  c.values = LatticeState::from_profile(window_radius, boundary, [N](int i) {
    return cutoff_profile(static_cast<double>(std::abs(i)) / static_cast<double>(N));
  });
  c.clipped = 2 * N > window_radius;
  return c;
}

}  // namespace slch
