#pragma once

// Allocation-free drift evaluation shared by the integrators.

#include <cmath>
#include <span>
#include <vector>

#include "slch/model.hpp"

namespace slch::detail {

class DriftKernel {
 public:
  explicit DriftKernel(const ModelSpec& spec)
      : spec_(spec),
        n_(spec.f.alpha1.size()),
        w_(n_), fw_(n_), afw_(n_), gw_(n_), h_(n_), hp_(n_), a2h_(n_), tmp_(n_) {}

  std::size_t size() const noexcept { return n_; }
  const ModelSpec& spec() const noexcept { return spec_; }

  /// Everything except -A^2 v: the part an IMEX step treats explicitly.
  void explicit_part(double t, double z, std::span<const double> v, std::span<double> out) {
    const Boundary b = spec_.boundary();
    const double k = spec_.k;
    const double lam = spec_.lambda;
    span_ops::eval_h(spec_, t, h_, hp_);
    span_ops::apply_A2(h_, tmp_, a2h_, b);
    if (k > 0.0) {
      const double ekz = std::exp(k * z);
      const double emkz = std::exp(-k * z);
      const double inv_k = 1.0 / k;
      double lin = k * z - lam;
      if (spec_.calculus == Calculus::Ito) lin -= 0.5 * k * k;
      for (std::size_t i = 0; i < n_; ++i) w_[i] = ekz * v[i] - inv_k * h_[i];
      span_ops::eval_f(spec_, w_, fw_);
      span_ops::apply_A(fw_, afw_, b);
      span_ops::eval_g(spec_, t, w_, gw_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double f2 = emkz * (gw_[i] - afw_[i]);
        const double f3 = inv_k * emkz * ((a2h_[i] + lam * h_[i]) + hp_[i]);
        out[i] = (lin * v[i] + f2) + f3;
      }
    } else {
      for (std::size_t i = 0; i < n_; ++i) w_[i] = v[i] + z * h_[i];
      span_ops::eval_f(spec_, w_, fw_);
      span_ops::apply_A(fw_, afw_, b);
      span_ops::eval_g(spec_, t, w_, gw_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double f2 = gw_[i] - afw_[i];
        const double f3 = z * ((-a2h_[i] + (1.0 - lam) * h_[i]) - hp_[i]);
        out[i] = (-lam * v[i] + f2) + f3;
      }
    }
  }

  /// Full drift F(t, v).
  void full(double t, double z, std::span<const double> v, std::span<double> out) {
    explicit_part(t, z, v, out);
    span_ops::apply_A2(v, tmp_, a2h_, spec_.boundary());
    for (std::size_t i = 0; i < n_; ++i) out[i] -= a2h_[i];
  }

  /// Ito drift of the SDE in u: -A^2 u - A f(u) - lambda u + g(t, u).
  void ito(double t, std::span<const double> u, std::span<double> out) {
    const Boundary b = spec_.boundary();
    span_ops::eval_f(spec_, u, fw_);
    span_ops::apply_A(fw_, afw_, b);
    span_ops::eval_g(spec_, t, u, gw_);
    span_ops::apply_A2(u, tmp_, a2h_, b);
    for (std::size_t i = 0; i < n_; ++i)
      out[i] = ((-a2h_[i] - afw_[i]) - spec_.lambda * u[i]) + gw_[i];
  }

  /// k u + h(t).
  void diffusion(double t, std::span<const double> u, std::span<double> out) {
    span_ops::eval_h(spec_, t, h_, hp_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = spec_.k * u[i] + h_[i];
  }

 private:
  const ModelSpec& spec_;
  std::size_t n_;
  std::vector<double> w_, fw_, afw_, gw_, h_, hp_, a2h_, tmp_;
};

}  // namespace slch::detail
