// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Optional arguments select criteria by number, e.g. `acceptance 3 8`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "slch/attractor.hpp"
#include "slch/liouville.hpp"
#include "slch/measures.hpp"
#include "slch/model.hpp"
#include "slch/parallel.hpp"

using namespace slch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

LatticeState gaussian_state(int R, Boundary b, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  LatticeState u(R, b);
  for (double& x : u.mutable_values()) x = g(rng);
  return u;
}

LatticeState flat(int R, double n) {
  LatticeState u = LatticeState::constant(R, 1.0);
  u *= n / norm(u);
  return u;
}

// 1 -----------------------------------------------------------------------------
Outcome operator_algebra() {
  std::mt19937_64 rng(1);
  double worst_bound = -1.0, worst_a2 = 0.0, worst_adj = 0.0;
  for (Boundary b : {Boundary::ZeroPad, Boundary::Periodic}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::uniform_real_distribution<double> sc(-3.0, 3.0);
      const auto u = gaussian_state(2 + trial % 60, b, rng, std::pow(10.0, sc(rng)));
      for (double p : {1.0, 2.0, 5.0, kInfNorm}) {
        const double n = lp_norm(u, p);
        worst_bound = std::max({worst_bound, lp_norm(apply_B(u), p) / (2 * n) - 1.0,
                                lp_norm(apply_Bstar(u), p) / (2 * n) - 1.0, lp_norm(apply_A(u), p) / (4 * n) - 1.0});
      }
      const double rhs = std::pow(norm(apply_A(u)), 2);
      worst_a2 = std::max(worst_a2, std::abs(inner(apply_A2(u), u) - rhs) / rhs);
      if (b == Boundary::Periodic) {
        const auto v = gaussian_state(u.window_radius(), b, rng, 1.0);
        worst_adj = std::max(worst_adj, std::abs(inner(apply_Bstar(u), v) - inner(u, apply_B(v))) / (norm(u) * norm(v)));
      }
    }
  }
  return {worst_bound <= 1e-10 && worst_a2 <= 1e-10 && worst_adj <= 1e-12,
          "max norm-bound excess " + num(std::max(worst_bound, 0.0)) + ", (A^2u,u) rel " + num(worst_a2) +
              ", adjointness rel " + num(worst_adj)};
}

// 2 -----------------------------------------------------------------------------
Outcome ou_calibration() {
  // Batch means over 50 blocks of 20 time units give the standard error of the variance.
  const auto path = NoisePath::sample(1, -1, 1000, 1e-2);
  const auto ou = ou_from_path(path);
  const std::size_t n0 = path.index_of(0.0), n1 = path.index_of(1000.0);
  const std::size_t blocks = 50, per = (n1 - n0) / blocks;
  std::vector<double> bv;
  double tot = 0.0;
  for (std::size_t k = 0; k < blocks; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) {
      const double z = ou.at_index(n0 + k * per + i);
      s += z * z;
    }
    bv.push_back(s / per);
    tot += s;
  }
  const double var = tot / (blocks * per);
  double ss = 0.0;
  for (double x : bv) ss += (x - var) * (x - var);
  const double se = std::sqrt(ss / (blocks - 1) / blocks);
  const bool var_ok = std::abs(var - 0.5) <= 3.0 * se;

  std::vector<int> ok(100, 0);
  parallel_for(100, [&](std::size_t s) {
    const auto p = NoisePath::sample(s + 1, -1, 1000, 1e-2);
    ok[s] = std::abs(ou_from_path(p).at(1000.0) / 1000.0) < 0.05;
  });
  const int good = std::count(ok.begin(), ok.end(), 1);
  return {var_ok && good >= 99, "variance " + num(var, 4) + " (SE " + num(se, 2) + "), |z(t)/t|<0.05 on " +
                                    std::to_string(good) + "/100 seeds"};
}

// 3 -----------------------------------------------------------------------------
// Per seed the halving ratio is the geometric mean over the ladder, (e_last / e_first)^(1/3).
Outcome scheme_consistency() {
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const int R = 8;
  std::string detail;
  bool pass = true;
  for (double k : {0.5, 0.0}) {
    const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, k);
    std::vector<double> ratios(20), steps(20 * 3);
    parallel_for(20, [&](std::size_t s) {
      const auto path = NoisePath::sample(s + 1, -1, 2, 1.25e-3);
      const auto ou = ou_from_path(path);
      const auto u0 = flat(R, 1.0);
      std::vector<double> err;
      for (double dt : dts) {
        const auto em = euler_maruyama(m, path, 0.0, 1.0, u0, dt, 1000000);
        const auto tr = solve_u(m, ou, 0.0, 1.0, u0, {Scheme::ImexSplit, dt});
        err.push_back(norm(em.final_state() - tr));
      }
      ratios[s] = std::cbrt(err.back() / err.front());
      for (std::size_t j = 0; j + 1 < err.size(); ++j) steps[s * 3 + j] = err[j + 1] / err[j];
    });
    const double med = median(ratios);
    pass = pass && med <= 0.75;
    detail += std::string(detail.empty() ? "" : "; ") + "k=" + num(k) + " median halving ratio " + num(med) +
              " (single-step ratios pooled " + num(median(steps)) + ")";
  }
  return {pass, detail};
}

// 4 -----------------------------------------------------------------------------
Outcome cocycle_law() {
  const int R = 6;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  const auto path = NoisePath::sample(4, -20, 20, 1e-2);
  const SchemeConfig sc{Scheme::ImexSplit, 1e-2};
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> steps(1, 300), start(-500, 500);
  double worst = 0.0;
  for (int cell = 0; cell < 50; ++cell) {
    const double t = steps(rng) * 1e-2, s = steps(rng) * 1e-2, tau = start(rng) * 1e-2;
    const auto u = gaussian_state(R, Boundary::ZeroPad, rng, 1.0);
    const auto lhs = cocycle(m, t + s, tau, path, u, sc);
    const auto rhs = cocycle(m, t, tau + s, shift_path(path, s), cocycle(m, s, tau, path, u, sc), sc);
    worst = std::max(worst, norm(lhs - rhs) / std::max(norm(lhs), 1e-300));
  }
  return {worst <= 1e-9, "worst relative gap over 50 cells " + num(worst)};
}

// 5 -----------------------------------------------------------------------------
Outcome absorption() {
  const int R = 32;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  auto zero = m;
  zero.g.forcing_profile.amplitude = 0.0;
  zero.h.profile.amplitude = 0.0;
  zero.realize(R, Boundary::ZeroPad);
  const auto fam = default_initial_family(R, Boundary::ZeroPad, {1, 10, 100}, 0);
  const std::vector<double> times{2.5, 5, 10, 20, 40};
  const SchemeConfig sc{Scheme::ImexSplit, 1e-4};
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto path = NoisePath::sample(seed, -45, 1, 1e-4);
    const auto e = run_absorption(m, path, 0.0, times, fam, sc);
    double worst_ratio = 0.0;
    if (e.T0) {
      for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] < *e.T0) continue;
        const auto a = e.arrivals_at(j);
        worst_ratio = std::max(worst_ratio, *std::max_element(a.begin(), a.end()) / *std::min_element(a.begin(), a.end()));
      }
    }
    const auto z = run_absorption(zero, path, 0.0, {times.back()}, fam, sc);
    const auto za = z.arrivals_at(0);
    const double zmax = *std::max_element(za.begin(), za.end());
    const bool ok = e.T0 && *e.T0 < times.back() && worst_ratio <= 1.5 && zmax < 1e-6;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": T0 " +
              (e.T0 ? num(*e.T0) : "none") + ", spread " + num(worst_ratio) + ", zero forcing " + num(zmax, 2);
  }
  return {pass, detail};
}

// 6 -----------------------------------------------------------------------------
Outcome tail_nullity() {
  const int R = 128;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  const int seeds = 20;
  std::vector<double> rel(seeds);
  std::vector<int> mono(seeds);
  parallel_for(seeds, [&](std::size_t s) {
    const auto path = NoisePath::sample(s + 1, -61, 1, 1e-2);
    const auto rep = run_tail_nullity(m, path, 0.0, 60.0, {8, 16, 32, 64}, flat(R, 10.0), {Scheme::ImexSplit, 1e-2});
    rel[s] = rep.tail_mass.back() / rep.total_norm_sq;
    mono[s] = rep.tail_nonincreasing();
  });
  const int small = std::count_if(rel.begin(), rel.end(), [](double r) { return r <= 1e-4; });
  const int nonincr = std::count(mono.begin(), mono.end(), 1);
  return {small >= 0.9 * seeds && nonincr == seeds,
          "tail beyond 64 <= 1e-4 |v|^2 on " + std::to_string(small) + "/" + std::to_string(seeds) +
              " seeds (max " + num(*std::max_element(rel.begin(), rel.end()), 2) + "), nonincreasing " +
              std::to_string(nonincr) + "/" + std::to_string(seeds)};
}

// 7 -----------------------------------------------------------------------------
Outcome measure_invariance() {
  const int R = 16;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  const auto obs = default_observables(100.0);
  const auto xi = InitialSelection::constant(LatticeState(R));
  const std::vector<double> windows{50, 100, 200};
  const int seeds = 10;
  std::vector<std::vector<double>> res(windows.size());
  double zero_step = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    const auto path = NoisePath::sample(s, -201, 2, 1e-2);
    for (std::size_t w = 0; w < windows.size(); ++w)
      for (const auto& r : invariance_study(m, path, 0.0, windows[w], 1.0, 1.0, xi, obs)) res[w].push_back(r.residual);
    if (s == 1)
      for (const auto& r : invariance_study(m, path, 0.0, 50.0, 1.0, 0.0, xi, obs)) zero_step = std::max(zero_step, r.residual);
  }
  std::vector<double> med;
  for (auto& v : res) med.push_back(median(v));
  const bool decreasing = med[1] < med[0] && med[2] < med[1];
  return {decreasing && zero_step == 0.0, "median residual W=50/100/200: " + num(med[0]) + ", " + num(med[1]) + ", " +
                                              num(med[2]) + "; t_step=0 residual " + num(zero_step)};
}

// 8 -----------------------------------------------------------------------------
// Per seed, |residual| is the mean over 16 consecutive unit windows of one trajectory.
Outcome ito_formula() {
  const int R = 8, windows = 16;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  const std::vector<CylindricalTestFunction> tfs{
      CylindricalTestFunction::bump({0, 1}, R, Boundary::ZeroPad, 4.0),
      CylindricalTestFunction::smooth_bump(R, Boundary::ZeroPad, 2.0, 4.0),
      CylindricalTestFunction::bump({-2, 0, 2}, R, Boundary::ZeroPad, 4.0)};
  const auto cst = CylindricalTestFunction::constant(1.0, R, Boundary::ZeroPad);
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const int seeds = 20;
  std::vector<std::vector<double>> slopes(tfs.size(), std::vector<double>(seeds));
  std::vector<double> single(seeds * tfs.size());
  std::vector<double> const_res(seeds);
  parallel_for(seeds, [&](std::size_t s) {
    const auto path = NoisePath::sample(s + 1, -1, windows + 1, 1.25e-3);
    std::vector<std::vector<double>> y(tfs.size()), y1(tfs.size());
    std::vector<double> x;
    for (double dt : dts) {
      const auto tr = euler_maruyama(m, path, 0.0, windows, flat(R, 1.0), dt);
      x.push_back(std::log(dt));
      for (std::size_t f = 0; f < tfs.size(); ++f) {
        double acc = 0.0;
        for (int w = 0; w < windows; ++w) {
          const double r = std::abs(ito_residual(m, path, tr, tfs[f], w, w + 1).residual);
          acc += r;
          if (w == 0) y1[f].push_back(std::log(r + 1e-300));
        }
        y[f].push_back(std::log(acc / windows));
      }
      for (int w = 0; w < windows; ++w)
        const_res[s] = std::max(const_res[s], std::abs(ito_residual(m, path, tr, cst, w, w + 1).residual));
    }
    for (std::size_t f = 0; f < tfs.size(); ++f) {
      slopes[f][s] = slope(x, y[f]);
      single[s * tfs.size() + f] = slope(x, y1[f]);
    }
  });
  bool pass = true;
  std::string per;
  for (std::size_t f = 0; f < tfs.size(); ++f) {
    const double md = median(slopes[f]);
    pass = pass && md >= 0.4;
    per += (f ? ", " : "") + tfs[f].name() + " " + num(md);
  }
  const double cmax = *std::max_element(const_res.begin(), const_res.end());
  return {pass && cmax == 0.0, "median log-log slope per test function: " + per + " (single-window pooled " +
                                   num(median(single)) + "); constant test function residual " + num(cmax)};
}

// 9 -----------------------------------------------------------------------------
Outcome liouville() {
  const int R = 16;
  const auto m = ModelSpec::default_compliant(R, Boundary::ZeroPad, 0.5);
  const auto tfs = default_test_functions(R, Boundary::ZeroPad, 4.0);
  struct Rung {
    double window, dt;
  };
  const std::vector<Rung> ladder{{50, 1e-2}, {100, 5e-3}, {200, 2.5e-3}};
  const int seeds = 5;
  std::vector<std::vector<double>> rel(ladder.size());
  double fine_max = 0.0, degenerate = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    const auto path = NoisePath::sample(s, -201, 11, 2.5e-3);
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      LiouvilleConfig lc;
      lc.s = 0.0;
      lc.t = 10.0;
      lc.window = ladder[r].window;
      lc.scheme = {Scheme::ImexSplit, ladder[r].dt};
      lc.xi = InitialSelection::constant(LatticeState(R));
      auto all = tfs;
      if (s == 1 && r == 0) all.push_back(CylindricalTestFunction::constant(1.0, R, Boundary::ZeroPad));
      const auto ser = liouville_series(m, path, lc, all);
      for (std::size_t f = 0; f < tfs.size(); ++f) {
        const double q = liouville_residual(ser, f).relative;
        rel[r].push_back(q);
        if (r + 1 == ladder.size()) fine_max = std::max(fine_max, q);
      }
      if (s == 1 && r == 0) {
        degenerate = std::abs(liouville_residual(ser, tfs.size()).residual);
        for (std::size_t f = 0; f < tfs.size(); ++f)
          degenerate = std::max(degenerate, std::abs(liouville_residual(ser, f, 7, 7).residual));
      }
    }
  }
  std::vector<double> med;
  for (auto& v : rel) med.push_back(median(v));
  bool monotone = true;
  for (std::size_t r = 1; r < med.size(); ++r) monotone = monotone && med[r] <= med[r - 1];
  return {fine_max <= 0.05 && monotone && degenerate == 0.0,
          "median relative residual along ladder " + num(med[0]) + ", " + num(med[1]) + ", " + num(med[2]) +
              "; worst at finest " + num(fine_max) + "; degenerate cases " + num(degenerate)};
}

// 10 ----------------------------------------------------------------------------
Outcome audit() {
  const auto rep = hypothesis_audit(ModelSpec::default_compliant(16), 10000, 10.0);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : rep.entries) worst = std::min(worst, e.worst_margin);
  auto cubic = model_from_json(R"({"f": {"form": "classical_cubic"}, "allow_noncompliant": true, "window_radius": 16})");
  const auto bad = hypothesis_audit(cubic, 10000, 10.0);
  const auto* e = bad.find("F", "summability");
  const bool flagged = e && !e->passed;
  return {rep.all_passed() && worst >= 0.0 && flagged,
          std::to_string(rep.entries.size()) + " checks, worst margin " + num(worst) +
              (flagged ? "; classical cubic summability failure reported" : "; classical cubic NOT flagged")};
}

// 11 ----------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / ("slch_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = fs::path(SLCH_SOURCE_DIR) / "configs" / "reproducibility.json";
  auto run = [&](const std::string& tag) {
    const std::string cmd = "SLCH_OUTPUT_DIR=\"" + (root / tag).string() + "\" \"" SLCH_CLI_PATH "\" run \"" +
                            cfg.string() + "\" >/dev/null 2>\"" + (root / (tag + ".err")).string() + "\"";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  };
  const int a = run("a"), b = run("b");
  if (a != 0 || b != 0) {
    const std::string err = slurp(root / "a.err");
    fs::remove_all(root);
    return {false, "cli exit codes " + std::to_string(a) + ", " + std::to_string(b) + ": " + err};
  }
  std::size_t files = 0, same = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    const fs::path other = root / "b" / entry.path().filename();
    if (fs::exists(other) && slurp(entry.path()) == slurp(other)) ++same;
  }
  std::size_t files_b = std::distance(fs::directory_iterator(root / "b"), fs::directory_iterator{});
  fs::remove_all(root);
  return {files > 1 && same == files && files_b == files,
          std::to_string(same) + "/" + std::to_string(files) + " artifacts byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"operator algebra", operator_algebra},
      {"OU calibration", ou_calibration},
      {"transform/scheme consistency", scheme_consistency},
      {"cocycle law", cocycle_law},
      {"pullback absorption", absorption},
      {"tail nullity", tail_nullity},
      {"measure invariance", measure_invariance},
      {"Ito formula", ito_formula},
      {"stochastic Liouville equation", liouville},
      {"hypothesis audit", audit},
      {"reproducibility", reproducibility},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << o.detail << " ("
              << num(secs, 3) << " s)" << std::endl;
  }
  return failed ? 1 : 0;
}
