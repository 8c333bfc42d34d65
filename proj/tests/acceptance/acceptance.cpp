// Acceptance checks for the primary criteria. Prints one PASS/FAIL line per
// criterion followed by indented details, and exits non-zero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mesochain/errors.hpp"
#include "mesochain/experiments.hpp"

using namespace mesochain;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = MESOCHAIN_PRESET_DIR;
const fs::path kCache = MESOCHAIN_TEST_CACHE;
const fs::path kRuns = MESOCHAIN_ACCEPTANCE_RUNS;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { details.push_back("info  " + what); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s  %s  (%.1f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(), secs);
  for (const auto& d : out.details) std::printf("        %s\n", d.c_str());
  std::fflush(stdout);
}

ScenarioConfig preset(const std::string& name) {
  auto c = load_config(kPresets / (name + ".conf"));
  c.output_dir = kRuns / name;
  c.cache_dir = kCache;
  return c;
}

// Preset runs are shared between criteria and computed once.
std::map<std::string, RunReport> runs;
std::map<std::string, std::string> run_failures;

const RunReport& run(const std::string& name) {
  if (auto it = runs.find(name); it != runs.end()) return it->second;
  if (auto it = run_failures.find(name); it != run_failures.end()) throw NumericalError(it->second);
  try {
    return runs.emplace(name, run_scenario(preset(name))).first->second;
  } catch (const std::exception& e) {
    run_failures[name] = name + ": " + e.what();
    throw;
  }
}

const std::vector<std::string> kAllPresets = {"lj-deterministic", "lj-noisy", "granular-gaussian",
                                              "granular-sine"};

}  // namespace

int main() {
  fs::create_directories(kRuns);

  criterion("kernel mass: integral of psi_eta over its support is 1 within 1e-14", [](Outcome& o) {
    for (double eta : {0.005, 0.01, 0.05}) {
      const WindowKernel k{0.5, 1.5, eta, 1.0};
      const double mass = integrate_psi_eta(k, -k.support_radius(), k.support_radius());
      o.check(std::abs(mass - 1.0) <= 1e-14, fmt("eta=%g  |mass-1| = %.2e", eta, std::abs(mass - 1.0)));
    }
  });

  criterion("operator sanity: D=500, N=10000, eta=0.01", [](Outcome& o) {
    const auto start = std::chrono::steady_clock::now();
    const ConvolutionOperator op(WindowKernel{0.5, 1.5, 0.01, 1.0}, Mesh{500, 1.0}, Mesh{10000, 1.0});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.check(secs < 60.0, fmt("assembly and SVD without cache: %.1f s (limit 60 s)", secs));
    const Eigen::VectorXd rows = op.matrix().rowwise().sum();
    const double row_dev = (rows.array() - 1.0).abs().maxCoeff();
    o.check(row_dev <= 1e-3, fmt("max |row sum - 1| = %.2e (limit 1e-3)", row_dev));
    const auto rep = op.condition_report();
    o.check(rep.sigma_max >= 0.9 && rep.sigma_max <= 1.1, fmt("sigma_1 = %.6f (range [0.9, 1.1])", rep.sigma_max));
    o.note(fmt("condition = %.3e, sigma_min = %.3e", rep.condition, rep.sigma_min));
    o.note(fmt("%.0f singular values below the cutoff; retained condition = %.3e",
               static_cast<double>(rep.truncated_count), rep.retained_condition));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Eigen::VectorXd fine(10000);
    for (Eigen::Index k = 0; k < fine.size(); ++k) fine(k) = g(rng);
    const Eigen::VectorXd gbar = op.apply(fine);
    const Eigen::VectorXd sol = min_norm_solve(op, gbar);
    const double res = (op.matrix() * sol - gbar).lpNorm<Eigen::Infinity>() / gbar.lpNorm<Eigen::Infinity>();
    if (rep.condition < 1e8) {
      o.check(res <= 1e-8, fmt("min_norm_solve residual = %.2e (limit 1e-8)", res));
    } else {
      o.note("condition >= 1e8, so the unregularized residual check does not apply");
      o.check(res <= 1e-8, fmt("truncated min_norm_solve residual = %.2e (limit 1e-8)", res));
    }
  });

  criterion("Jacobian reconstruction: LJ presets <= 0.5%, desk-scale N=2000, D=200 <= 2%", [](Outcome& o) {
    for (const char* name : {"lj-deterministic", "lj-noisy"}) {
      double worst = 0.0;
      for (const auto& e : run(name).errors) worst = std::max(worst, e.J.value);
      o.check(worst <= 5e-3, std::string(name) + fmt(": max relative l_inf J error %.3e", worst));
    }
    auto desk = preset("lj-deterministic");
    desk.name = "lj-desk";
    desk.N = 2000;
    desk.D = 200;
    desk.output_dir = kRuns / "lj-desk";
    const auto r = run_scenario(desk);
    double worst = 0.0;
    for (const auto& e : r.errors) worst = std::max(worst, e.J.value);
    o.check(worst <= 2e-2, fmt("desk scale: max relative l_inf J error %.3e", worst));
    const auto& det = run("lj-deterministic");
    const auto& noisy = run("lj-noisy");
    double dist = 0.0;
    for (std::size_t s = 0; s < det.J_rec.size(); ++s) {
      double mean = 0.0, d = 0.0;
      for (std::size_t k = 0; k < det.J_rec[s].size(); ++k) {
        mean += det.J_rec[s][k];
        d = std::max(d, std::abs(det.J_rec[s][k] - noisy.J_rec[s][k]));
      }
      dist = std::max(dist, d / (mean / static_cast<double>(det.J_rec[s].size())));
    }
    o.note(fmt("deterministic vs noisy J_rec: max l_inf distance %.3e of the mean (expected <= 1e-2)", dist));
  });

  criterion("granular-gaussian stress bands over t in [1e-3, 2.2e-2]: Tc <= 15%, Tint <= 12%", [](Outcome& o) {
    const auto& r = run("granular-gaussian");
    double tc = 0.0, tint = 0.0, tc_zero = 0.0, tint_zero = 0.0;
    std::size_t count = 0;
    for (const auto& e : r.errors) {
      if (e.t < 1e-3 - 1e-12 || e.t > 2.2e-2 + 1e-12) continue;
      ++count;
      tc = std::max(tc, e.Tc_closed.value);
      tint = std::max(tint, e.Tint_closed.value);
      tc_zero = std::max(tc_zero, e.Tc_zero.value);
      tint_zero = std::max(tint_zero, e.Tint_zero.value);
    }
    o.check(count == 22, fmt("%.0f snapshots in the window", static_cast<double>(count)));
    o.check(tc <= 0.15, fmt("max closed convective stress error %.4f", tc));
    o.check(tint <= 0.12, fmt("max closed interaction stress error %.4f", tint));
    o.note(fmt("zero-order errors for comparison: Tc %.4f, Tint %.4f", tc_zero, tint_zero));
  });

  criterion("zero-order dominance on granular-sine for t <= 2e-3: zero >= 1.5x closed and >= 50%", [](Outcome& o) {
    const auto& r = run("granular-sine");
    for (const auto& e : r.errors) {
      if (e.t > 2e-3 + 1e-12) continue;
      const double ratio = e.Tc_zero.value / e.Tc_closed.value;
      o.check(ratio >= 1.5 && e.Tc_zero.value >= 0.5,
              fmt("t=%.0e  zero-order %.4f  closed %.4f", e.t, e.Tc_zero.value, e.Tc_closed.value) +
                  fmt("  ratio %.2f", ratio));
    }
  });

  criterion("exact-field substitution: closed stresses on exact (J, v) within 1e-2 on all presets", [](Outcome& o) {
    for (const auto& name : kAllPresets) {
      double tc = 0.0, tint = 0.0;
      double tc_t = 0.0, tint_t = 0.0;
      for (const auto& e : run(name).errors) {
        if (e.Tc_exact_fields.value > tc) tc = e.Tc_exact_fields.value, tc_t = e.t;
        if (e.Tint_exact_fields.value > tint) tint = e.Tint_exact_fields.value, tint_t = e.t;
      }
      o.check(tc <= 1e-2, name + fmt(": worst Tc error %.3e at t=%.0e", tc, tc_t));
      o.check(tint <= 1e-2, name + fmt(": worst Tint error %.3e at t=%.0e", tint, tint_t));
    }
  });

  criterion("synthetic demo: retention >= 80% reconstructed, <= 50% averaged; noise <= 30%", [](Outcome& o) {
    DemoOptions opts;
    opts.cache_dir = kCache;
    opts.output_dir = kRuns / "demo";
    const auto d = synthetic_deconvolution_demo(opts);
    o.check(d.triangle_retention_reconstruction >= 0.8,
            fmt("triangle retention in reconstruction %.3f", d.triangle_retention_reconstruction));
    o.check(d.triangle_retention_average <= 0.5,
            fmt("triangle retention in average %.3f", d.triangle_retention_average));
    o.check(d.noise_ratio <= 0.3, fmt("reconstructed / injected noise (RMS) %.3f", d.noise_ratio));
    o.note(fmt("same ratio in max norm %.3f", d.noise_ratio_max));
  });

  criterion("dynamics invariants: energy <= 1e-4, momentum <= 1e-12/step, reversibility 1e-10", [](Outcome& o) {
    const auto& r = run("granular-gaussian");
    o.check(r.max_energy_drift <= 1e-4, fmt("granular-gaussian max relative energy drift %.3e", r.max_energy_drift));
    o.check(r.momentum_drift_per_step <= 1e-12,
            fmt("granular-gaussian max momentum change per step %.3e", r.momentum_drift_per_step));
    o.note(fmt("dt used %.3e after %.0f halvings", r.dt_used, static_cast<double>(r.dt_halvings)));
    const auto cfg = preset("granular-gaussian");
    auto s = make_initial_state(cfg.N, cfg.L, cfg.M, cfg.ic, cfg.kernel.eta);
    const auto start = s;
    VerletIntegrator fwd(cfg.potential, cfg.dt);
    for (int i = 0; i < 1000; ++i) fwd.step(s);
    for (double& v : s.v) v = -v;
    VerletIntegrator back(cfg.potential, cfg.dt);
    for (int i = 0; i < 1000; ++i) back.step(s);
    double dq = 0.0, dv = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      dq = std::max(dq, std::abs(s.q[j] - start.q[j]));
      dv = std::max(dv, std::abs(-s.v[j] - start.v[j]));
    }
    o.check(dq <= 1e-10 && dv <= 1e-10, fmt("1000 steps forward and back: max |dq| %.2e, max |dv| %.2e", dq, dv));
  });

  criterion("sign and structure on every snapshot: Tc <= 0, granular Tint >= 0, mass within 1e-6", [](Outcome& o) {
    for (const auto& name : kAllPresets) {
      const auto& r = run(name);
      const bool granular = name.rfind("granular", 0) == 0;
      double tc_max = -INFINITY, tint_min = INFINITY, mass_dev = 0.0;
      for (const auto& e : r.errors) {
        tc_max = std::max({tc_max, e.max_Tc_exact, e.max_Tc_closed});
        tint_min = std::min({tint_min, e.min_Tint_exact, e.min_Tint_closed});
        mass_dev = std::max(mass_dev, std::abs(e.mass - 1.0));
      }
      o.check(tc_max <= 0.0, name + fmt(": largest Tc (exact or closed) %.3e", tc_max));
      if (granular) o.check(tint_min >= 0.0, name + fmt(": smallest Tint (exact or closed) %.3e", tint_min));
      o.check(mass_dev <= 1e-6, name + fmt(": max |integral rho_bar - M| %.3e", mass_dev));
    }
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
