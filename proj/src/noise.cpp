#include "slch/noise.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <random>
#include <string>

#include "slch/error.hpp"
#include "slch/format.hpp"

namespace slch {

struct NoisePath::Data {
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::int64_t i_min = 0;  // t_min = i_min * dt (in the frame the sample was drawn in)
  std::vector<double> increments;
  std::vector<double> innovations;
  std::vector<double> prefix;  // prefix[n] = sum of increments[0..n)
  double z_start = 0.0;
  mutable std::once_flag z_once;
  mutable std::shared_ptr<const std::vector<double>> z_stationary;
};

namespace {

std::int64_t grid_multiple(double t, double dt, std::string_view what) {
  const double m = t / dt;
  const double mr = std::nearbyint(m);
  if (std::fabs(m - mr) > 1e-9 * std::max(1.0, std::fabs(m))) {
    throw ConfigError(std::string(what) + " = " + fmt_double(t) + " is not a multiple of dt = " +
                      fmt_double(dt));
  }
  return static_cast<std::int64_t>(mr);
}

struct OuCoefficients {
  double decay;       // e^{-dt}
  double gain;        // weight of the Brownian increment
  double innovation;  // std. dev. of the independent remainder
};

// Exact step z_{n+1} = e^{-dt} z_n + I_n, I_n = int e^{-(t_{n+1}-s)} dW(s), split as
// gain * dW_n + innovation * eta_n with eta_n independent of dW_n.
OuCoefficients ou_coefficients(double dt) {
  const double em1 = std::expm1(-dt);      // e^{-dt} - 1
  const double em2 = std::expm1(-2.0 * dt);
  const double var_total = -em2 / 2.0;     // (1 - e^{-2dt}) / 2
  const double cov = -em1;                 // Cov(I, dW) = 1 - e^{-dt}
  const double var_cond = std::max(0.0, var_total - cov * cov / dt);
  return {std::exp(-dt), cov / dt, std::sqrt(var_cond)};
}

std::vector<double> ou_recursion(const NoisePath::Data& d, double z0, std::size_t from) {
  const auto c = ou_coefficients(d.dt);
  std::vector<double> z(d.increments.size() + 1, 0.0);
  z[from] = z0;
  for (std::size_t n = from; n < d.increments.size(); ++n) {
    z[n + 1] = c.decay * z[n] + c.gain * d.increments[n] + c.innovation * d.innovations[n];
  }
  return z;
}

}  // namespace

NoisePath NoisePath::sample(std::uint64_t seed, double t_min, double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_min < 0.0 && 0.0 < t_max)) throw ConfigError("noise span must satisfy t_min < 0 < t_max");
  const std::int64_t i_min = grid_multiple(t_min, dt, "t_min");
  const std::int64_t i_max = grid_multiple(t_max, dt, "t_max");
  const auto steps = static_cast<std::size_t>(i_max - i_min);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> inc(steps);
  std::vector<double> innov(steps);
  const double sdt = std::sqrt(dt);
  for (auto& v : inc) v = sdt * normal(rng);
  for (auto& v : innov) v = normal(rng);
  const double z0 = std::sqrt(0.5) * normal(rng);
  return from_increments(static_cast<double>(i_min) * dt, dt, std::move(inc), std::move(innov),
                         z0, seed);
}

NoisePath NoisePath::from_increments(double t_min, double dt, std::vector<double> increments,
                                     std::vector<double> innovations, double z_start,
                                     std::uint64_t seed) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  const std::int64_t i_min = grid_multiple(t_min, dt, "t_min");
  const auto steps = static_cast<std::int64_t>(increments.size());
  if (!(i_min < 0 && i_min + steps > 0)) {
    throw ConfigError("noise span must satisfy t_min < 0 < t_max");
  }
  if (innovations.empty()) innovations.assign(increments.size(), 0.0);
  if (innovations.size() != increments.size()) {
    throw ConfigError("innovations must match the number of increments");
  }
  auto d = std::make_shared<Data>();
  d->dt = dt;
  d->seed = seed;
  d->i_min = i_min;
  d->increments = std::move(increments);
  d->innovations = std::move(innovations);
  d->z_start = z_start;
  d->prefix.resize(d->increments.size() + 1);
  d->prefix[0] = 0.0;
  for (std::size_t n = 0; n < d->increments.size(); ++n) {
    d->prefix[n + 1] = d->prefix[n] + d->increments[n];
  }
  return NoisePath(std::move(d), -i_min);
}

double NoisePath::dt() const noexcept { return data_->dt; }
std::uint64_t NoisePath::seed() const noexcept { return data_->seed; }
std::size_t NoisePath::steps() const noexcept { return data_->increments.size(); }
double NoisePath::t_min() const noexcept { return time_at(0); }
double NoisePath::t_max() const noexcept { return time_at(steps()); }

double NoisePath::time_at(std::size_t n) const noexcept {
  return static_cast<double>(static_cast<std::int64_t>(n) - anchor_) * data_->dt;
}

std::size_t NoisePath::index_of_multiple(std::int64_t m) const {
  const std::int64_t n = anchor_ + m;
  if (n < 0 || n > static_cast<std::int64_t>(steps())) {
    throw SpanError("time " + fmt_double(static_cast<double>(m) * dt()) + " outside path span [" +
                        fmt_double(t_min()) + ", " + fmt_double(t_max()) + "]",
                    t_min(), t_max());
  }
  return static_cast<std::size_t>(n);
}

std::size_t NoisePath::index_of(double t) const {
  const double m = t / dt();
  const double mr = std::nearbyint(m);
  if (std::fabs(m - mr) > 1e-9 * std::max(1.0, std::fabs(m))) {
    throw SpanError("time " + fmt_double(t) + " is not on the path grid (dt = " +
                        fmt_double(dt()) + ")",
                    t_min(), t_max());
  }
  return index_of_multiple(static_cast<std::int64_t>(mr));
}

bool NoisePath::contains(double t) const noexcept {
  return t >= t_min() - 1e-9 * dt() && t <= t_max() + 1e-9 * dt();
}

double NoisePath::W(std::size_t n) const noexcept {
  return data_->prefix[n] - data_->prefix[static_cast<std::size_t>(anchor_)];
}

std::vector<double> NoisePath::W_values() const {
  std::vector<double> w(steps() + 1);
  for (std::size_t n = 0; n < w.size(); ++n) w[n] = W(n);
  return w;
}

double NoisePath::increment_between(std::size_t n0, std::size_t n1) const noexcept {
  if (n1 == n0 + 1) return data_->increments[n0];
  return data_->prefix[n1] - data_->prefix[n0];
}

std::span<const double> NoisePath::increments() const noexcept { return data_->increments; }
std::span<const double> NoisePath::innovations() const noexcept { return data_->innovations; }
double NoisePath::z_start() const noexcept { return data_->z_start; }

std::shared_ptr<const std::vector<double>> NoisePath::stationary_z() const {
  std::call_once(data_->z_once, [this] {
    data_->z_stationary =
        std::make_shared<const std::vector<double>>(ou_recursion(*data_, data_->z_start, 0));
  });
  return data_->z_stationary;
}

NoisePath shift_path(const NoisePath& path, double s) {
  const double m = s / path.dt();
  const double mr = std::nearbyint(m);
  if (std::fabs(m - mr) > 1e-9 * std::max(1.0, std::fabs(m))) {
    throw SpanError("shift " + fmt_double(s) + " is not a multiple of dt", path.t_min(),
                    path.t_max());
  }
  const auto shift = static_cast<std::int64_t>(mr);
  const std::int64_t new_anchor = path.anchor() + shift;
  if (new_anchor <= 0 || new_anchor >= static_cast<std::int64_t>(path.steps())) {
    const double lo = path.t_min() + path.dt();
    const double hi = path.t_max() - path.dt();
    throw SpanError("shift " + fmt_double(s) + " leaves the path span; admissible shifts are [" +
                        fmt_double(lo) + ", " + fmt_double(hi) + "]",
                    lo, hi);
  }
  return NoisePath(path.data_, new_anchor);
}

std::string_view ou_init_name(OuInit init) noexcept {
  return init == OuInit::Stationary ? "stationary" : "burn_in";
}

double OuSamples::at_index(std::size_t n) const {
  if (n < valid_from || n >= z->size()) {
    throw SpanError("OU sample requested outside the usable span [" + fmt_double(usable_t_min()) +
                        ", " + fmt_double(path.t_max()) + "]",
                    usable_t_min(), path.t_max());
  }
  return (*z)[n];
}

double OuSamples::at(double t) const {
  const double m = t / path.dt();
  const double mr = std::nearbyint(m);
  if (std::fabs(m - mr) <= 1e-9 * std::max(1.0, std::fabs(m))) {
    return at_index(path.index_of_multiple(static_cast<std::int64_t>(mr)));
  }
  const double fl = std::floor(m);
  const std::size_t n0 = path.index_of_multiple(static_cast<std::int64_t>(fl));
  const std::size_t n1 = path.index_of_multiple(static_cast<std::int64_t>(fl) + 1);
  const double w = m - fl;
  return (1.0 - w) * at_index(n0) + w * at_index(n1);
}

OuSamples OuSamples::synthetic(const NoisePath& path, std::vector<double> values) {
  if (values.size() != path.steps() + 1) {
    throw ConfigError("synthetic OU values must cover every grid node");
  }
  OuSamples ou{path, std::make_shared<const std::vector<double>>(std::move(values))};
  return ou;
}

OuSamples ou_from_path(const NoisePath& path, double burn_in) {
  if (!(burn_in >= 0.0)) throw ConfigError("burn_in must be >= 0");
  if (burn_in == 0.0) {
    return OuSamples{path, path.stationary_z(), 0, 0.0, OuInit::Stationary};
  }
  const double m = burn_in / path.dt();
  const auto burn_steps = static_cast<std::size_t>(std::ceil(m - 1e-9));
  if (burn_steps >= path.steps()) {
    throw SpanError("burn-in longer than the path span", path.t_min(), path.t_max());
  }
  // Start from rest at t_min; the recursion forgets the start like e^{-t}.
  std::vector<double> z(path.steps() + 1, 0.0);
  const auto c = ou_coefficients(path.dt());
  const auto inc = path.increments();
  const auto eta = path.innovations();
  for (std::size_t n = 0; n < path.steps(); ++n) {
    z[n + 1] = c.decay * z[n] + c.gain * inc[n] + c.innovation * eta[n];
  }
  return OuSamples{path, std::make_shared<const std::vector<double>>(std::move(z)), burn_steps,
                   burn_in, OuInit::BurnIn};
}

std::vector<SublinearityRow> sublinearity_report(const OuSamples& ou, double t0) {
  const NoisePath& p = ou.path;
  const std::size_t zero = p.index_of(0.0);
  const double dt = p.dt();
  std::vector<SublinearityRow> rows;
  for (int sign : {-1, 1}) {
    // Running trapezoid integral from 0 outwards.
    double integral = 0.0;
    std::size_t n = zero;
    double t = t0;
    while (true) {
      const double target = sign * t;
      if (!p.contains(target) || target < ou.usable_t_min() - 1e-12) break;
      const std::size_t idx = p.index_of(std::round(target / dt) * dt);
      while (n != idx) {
        const std::size_t next = sign > 0 ? n + 1 : n - 1;
        integral += 0.5 * dt * (ou.at_index(n) + ou.at_index(next)) * sign;
        n = next;
      }
      const double tt = p.time_at(idx);
      rows.push_back({tt, ou.at_index(idx) / tt, integral / tt});
      t *= 2.0;
    }
  }
  std::sort(rows.begin(), rows.end(),
            [](const SublinearityRow& a, const SublinearityRow& b) { return a.t < b.t; });
  return rows;
}

void write_path_csv(std::ostream& os, const OuSamples& ou) {
  const NoisePath& p = ou.path;
  os << "# seed=" << p.seed() << ", dt=" << fmt_double(p.dt())
     << ", burn_in=" << fmt_double(ou.burn_in) << ", init=" << ou_init_name(ou.init) << '\n';
  os << "t,W,z\n";
  for (std::size_t n = ou.valid_from; n <= p.steps(); ++n) {
    os << fmt_double(p.time_at(n)) << ',' << fmt_double(p.W(n)) << ','
       << fmt_double((*ou.z)[n]) << '\n';
  }
}

}  // namespace slch
