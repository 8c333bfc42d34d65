#include "mesochain/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mesochain/errors.hpp"

namespace mesochain {

ErrorValue error_linf(std::span<const double> exact, std::span<const double> approx,
                      double zero_threshold) {
  if (exact.size() != approx.size()) throw DomainError("error_linf: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num = std::max(num, std::abs(exact[i] - approx[i]));
    den = std::max(den, std::abs(exact[i]));
  }
  if (den <= zero_threshold || den == 0.0) return {num, true};
  return {num / den, false};
}

ErrorValue error_linf(const Field& exact, const Field& approx, double zero_threshold) {
  if (!(exact.mesh == approx.mesh)) throw DomainError("error_linf: mesh mismatch");
  return error_linf(exact.values, approx.values, zero_threshold);
}

SnapshotAnalysis analyze_snapshot(const ChainState& state, const Potential& pot,
                                  const ConvolutionOperator& op, const AnalysisSettings& settings) {
  const Mesh& coarse = op.coarse();
  const Mesh& fine = op.fine();
  const WindowKernel& kernel = op.kernel();
  const std::size_t N = state.size();

  SnapshotAnalysis a;
  a.t = state.t;
  a.rho_bar = average_density(state, kernel, coarse);
  a.mom_bar = average_momentum(state, kernel, coarse);
  a.v_bar = average_velocity(a.rho_bar, a.mom_bar);
  a.Tc_exact = exact_convective_stress(state, kernel, coarse, a.v_bar);
  a.Tint_exact = exact_interaction_stress(state, pot, kernel, coarse);
  a.exact = exact_micro_fields(state, fine);

  a.rec = reconstruct(op, a.rho_bar, a.mom_bar, state.M, settings.method, settings.reconstruct);
  Method zero;
  zero.kind = Method::Kind::zero;
  a.zero = reconstruct(op, a.rho_bar, a.mom_bar, state.M, zero, settings.reconstruct);
  const Reconstruction exact_rec = from_micro_fields(a.exact, state.M);

  a.Tc_closed = closed_convective_stress(a.rec, a.v_bar, kernel, coarse);
  a.Tc_zero = closed_convective_stress(a.zero, a.v_bar, kernel, coarse);
  a.Tc_exact_fields = closed_convective_stress(exact_rec, a.v_bar, kernel, coarse);
  a.Tint_closed = closed_interaction_stress(a.rec, pot, kernel, coarse, N);
  a.Tint_zero = closed_interaction_stress(a.zero, pot, kernel, coarse, N);
  a.Tint_exact_fields = closed_interaction_stress(exact_rec, pot, kernel, coarse, N);

  const double z = settings.stress_zero_threshold;
  auto& e = a.errors;
  e.t = state.t;
  e.Tc_closed = error_linf(a.Tc_exact, a.Tc_closed, z);
  e.Tc_zero = error_linf(a.Tc_exact, a.Tc_zero, z);
  e.Tint_closed = error_linf(a.Tint_exact, a.Tint_closed, z);
  e.Tint_zero = error_linf(a.Tint_exact, a.Tint_zero, z);
  e.Tc_exact_fields = error_linf(a.Tc_exact, a.Tc_exact_fields, z);
  e.Tint_exact_fields = error_linf(a.Tint_exact, a.Tint_exact_fields, z);
  e.J = error_linf(a.exact.jacobian, a.rec.J_rec);
  e.v = error_linf(a.exact.velocity, a.rec.v_rec);
  e.floor_count = a.rec.floor_count;
  auto vmax = [](const Field& f) { return *std::max_element(f.values.begin(), f.values.end()); };
  auto vmin = [](const Field& f) { return *std::min_element(f.values.begin(), f.values.end()); };
  e.max_Tc_exact = vmax(a.Tc_exact);
  e.max_Tc_closed = vmax(a.Tc_closed);
  e.min_Tint_exact = vmin(a.Tint_exact);
  e.min_Tint_closed = vmin(a.Tint_closed);
  double mass = 0.0;
  for (double r : a.rho_bar.values) mass += r;
  e.mass = mass * coarse.spacing();
  return a;
}

namespace {

struct EnergyExceeded {
  double t;
  double drift;
};

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path), path_(path) {
    if (!out_) throw NumericalError("cannot write " + path.string());
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  template <class... T>
  void row(const T&... values) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << values), ...);
    out_ << '\n';
  }
  ~CsvWriter() { out_.flush(); }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

std::string snapshot_name(const std::string& prefix, std::size_t index) {
  std::ostringstream os;
  os << prefix << std::setw(3) << std::setfill('0') << index << ".csv";
  return os.str();
}

void write_snapshot_csv(const std::filesystem::path& path, const SnapshotAnalysis& a) {
  CsvWriter csv(path, {"x", "rho_bar", "v_bar", "Tc_exact", "Tc_closed", "Tc_zero", "Tint_exact",
                       "Tint_closed", "Tint_zero"});
  const Mesh& m = a.rho_bar.mesh;
  for (std::size_t i = 0; i < m.count; ++i) {
    csv.row(m.node(i), a.rho_bar[i], a.v_bar[i], a.Tc_exact[i], a.Tc_closed[i], a.Tc_zero[i],
            a.Tint_exact[i], a.Tint_closed[i], a.Tint_zero[i]);
  }
}

void write_fine_csv(const std::filesystem::path& path, const SnapshotAnalysis& a) {
  CsvWriter csv(path, {"y", "J_exact", "J_rec", "J_zero", "v_exact", "v_rec", "v_zero"});
  const Mesh& m = a.exact.jacobian.mesh;
  for (std::size_t k = 0; k < m.count; ++k) {
    csv.row(m.node(k), a.exact.jacobian[k], a.rec.J_rec[k], a.zero.J_rec[k], a.exact.velocity[k],
            a.rec.v_rec[k], a.zero.v_rec[k]);
  }
}

nlohmann::json potential_json(const Potential& pot) {
  return std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LennardJones>) {
          return {{"type", "lj"}, {"depth", p.depth}, {"zero_distance", p.zero_distance}};
        } else {
          return {{"type", "granular"}, {"stiffness", p.stiffness}, {"exponent", p.exponent},
                  {"range", p.range}};
        }
      },
      pot);
}

std::string ic_name(const ICSpec& ic) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LJDeterministic>) return "lj-deterministic";
        else if constexpr (std::is_same_v<T, LJNoisy>) return "lj-noisy";
        else if constexpr (std::is_same_v<T, GranularGaussian>) return "granular-gaussian";
        else return "granular-sine";
      },
      ic);
}

nlohmann::json error_json(const ErrorValue& e) { return {{"value", e.value}, {"absolute", e.absolute}}; }

bool uniform_spacing(const std::vector<double>& t) {
  if (t.size() < 2) return false;
  const double dt = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs(t[i] - t[i - 1] - dt) > 1e-9 * dt) return false;
  return true;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const Logger& log) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  const Mesh coarse{config.D, config.L};
  const Mesh fine{config.N, config.L};
  OperatorOptions opts;
  opts.cutoff_relative = config.cutoff_relative;
  opts.cache_dir = config.cache_dir;
  say("assembling operator (D=" + std::to_string(config.D) + ", N=" + std::to_string(config.N) + ")");
  const ConvolutionOperator op(config.kernel, coarse, fine, opts);

  RunReport report;
  report.output_dir = config.output_dir;
  report.condition = op.condition_report();
  if (report.condition.truncated_count > 0) {
    std::ostringstream os;
    os << report.condition.truncated_count << " singular values below the cutoff were truncated"
       << " (smallest sigma " << report.condition.sigma_min << ")";
    report.warnings.push_back(os.str());
  }

  AnalysisSettings settings;
  settings.method = config.method;
  settings.reconstruct.floor_fraction = config.floor_fraction;
  settings.reconstruct.strict = config.strict_reconstruction;
  settings.stress_zero_threshold = config.stress_zero_threshold;

  std::vector<BalanceSnapshot> balance;
  for (int halving = 0;; ++halving) {
    const double dt = config.dt / std::pow(2.0, halving);
    report.snapshot_csvs.clear();
    report.fine_csvs.clear();
    report.errors.clear();
    report.J_rec.clear();
    report.energy.clear();
    balance.clear();
    report.max_energy_drift = 0.0;
    report.max_momentum_drift = 0.0;
    std::size_t snapshot_index = 0;
    try {
      ChainState state = make_initial_state(config.N, config.L, config.M, config.ic, config.kernel.eta);
      VerletIntegrator integrator(config.potential, dt);
      const double E0 = total_energy(state, config.potential);
      const double P0 = total_momentum(state);
      const double escale = std::abs(E0) > 0.0 ? std::abs(E0) : 1.0;
      auto sample = [&]() {
        const double E = total_energy(state, config.potential);
        const double P = total_momentum(state);
        const double drift = std::abs(E - E0) / escale;
        report.energy.push_back({state.t, E, P, drift});
        report.max_energy_drift = std::max(report.max_energy_drift, drift);
        report.max_momentum_drift = std::max(report.max_momentum_drift, std::abs(P - P0));
        if (drift > config.energy_tolerance) throw EnergyExceeded{state.t, drift};
      };
      sample();
      for (; snapshot_index < config.snapshot_times.size(); ++snapshot_index) {
        const double target = config.snapshot_times[snapshot_index];
        while (state.t < target) {
          const double next = std::min(target, state.t + config.energy_interval);
          integrator.advance_to(state, next);
          sample();
        }
        const SnapshotAnalysis a = analyze_snapshot(state, config.potential, op, settings);
        const auto path = config.output_dir / snapshot_name("snapshot_", snapshot_index);
        write_snapshot_csv(path, a);
        report.snapshot_csvs.push_back(path);
        if (config.write_fine_fields) {
          const auto fpath = config.output_dir / snapshot_name("fine_", snapshot_index);
          write_fine_csv(fpath, a);
          report.fine_csvs.push_back(fpath);
        }
        report.errors.push_back(a.errors);
        report.J_rec.push_back(a.rec.J_rec.values);
        balance.push_back({a.t, a.rho_bar, a.mom_bar, a.v_bar, a.Tc_exact, a.Tint_exact});
        std::ostringstream os;
        os << "t=" << a.t << " err_Tc=" << a.errors.Tc_closed.value
           << " err_Tint=" << a.errors.Tint_closed.value << " err_J=" << a.errors.J.value
           << " oracle_Tc=" << a.errors.Tc_exact_fields.value
           << " oracle_Tint=" << a.errors.Tint_exact_fields.value;
        say(os.str());
      }
      if (state.t < config.t_final) {
        while (state.t < config.t_final) {
          integrator.advance_to(state, std::min(config.t_final, state.t + config.energy_interval));
          sample();
        }
      }
      report.dt_used = dt;
      report.dt_halvings = halving;
      report.steps = integrator.steps_taken();
      break;
    } catch (const OrderingError& e) {
      if (halving >= config.max_dt_halvings) {
        throw NumericalError("integrator failed before snapshot " + std::to_string(snapshot_index) +
                             " after " + std::to_string(halving) + " dt halvings: " + e.what());
      }
      report.warnings.push_back("dt=" + std::to_string(dt) + " rejected: " + e.what());
      say(report.warnings.back());
    } catch (const EnergyExceeded& e) {
      std::ostringstream os;
      os << "dt=" << dt << " rejected: relative energy drift " << e.drift << " at t=" << e.t;
      if (halving >= config.max_dt_halvings) {
        throw NumericalError("energy drift limit exceeded before snapshot " +
                             std::to_string(snapshot_index) + " after " + std::to_string(halving) +
                             " dt halvings (" + os.str() + ")");
      }
      report.warnings.push_back(os.str());
      say(report.warnings.back());
    } catch (const NumericalError& e) {
      throw NumericalError("snapshot " + std::to_string(snapshot_index) + ": " + e.what());
    }
  }
  report.momentum_drift_per_step =
      report.steps > 0 ? report.max_momentum_drift / static_cast<double>(report.steps) : 0.0;

  for (std::size_t s = 0; s < report.errors.size(); ++s) {
    if (report.errors[s].floor_count > 0) {
      report.warnings.push_back("snapshot " + std::to_string(s) + ": density floor applied at " +
                                std::to_string(report.errors[s].floor_count) + " fine nodes");
    }
  }

  report.errors_csv = config.output_dir / "errors.csv";
  {
    CsvWriter csv(report.errors_csv, {"t", "err_Tc_closed", "err_Tc_zero", "err_Tint_closed",
                                      "err_Tint_zero", "err_J", "err_v", "floor_count"});
    for (const auto& e : report.errors) {
      csv.row(e.t, e.Tc_closed.value, e.Tc_zero.value, e.Tint_closed.value, e.Tint_zero.value,
              e.J.value, e.v.value, e.floor_count);
    }
  }
  report.diagnostics_csv = config.output_dir / "diagnostics.csv";
  {
    CsvWriter csv(report.diagnostics_csv,
                  {"t", "err_Tc_exact_fields", "err_Tint_exact_fields", "max_Tc_exact",
                   "max_Tc_closed", "min_Tint_exact", "min_Tint_closed", "mass", "Tc_absolute",
                   "Tint_absolute"});
    for (const auto& e : report.errors) {
      csv.row(e.t, e.Tc_exact_fields.value, e.Tint_exact_fields.value, e.max_Tc_exact,
              e.max_Tc_closed, e.min_Tint_exact, e.min_Tint_closed, e.mass,
              static_cast<int>(e.Tc_closed.absolute), static_cast<int>(e.Tint_closed.absolute));
    }
  }
  report.energy_csv = config.output_dir / "energy.csv";
  {
    CsvWriter csv(report.energy_csv, {"t", "energy", "momentum", "relative_drift"});
    for (const auto& s : report.energy) csv.row(s.t, s.energy, s.momentum, s.relative_drift);
  }
  std::vector<double> times;
  for (const auto& b : balance) times.push_back(b.t);
  if (uniform_spacing(times)) {
    report.balance_csv = config.output_dir / "balance.csv";
    CsvWriter csv(report.balance_csv, {"t", "mass_residual_linf", "momentum_residual_linf"});
    for (const auto& r : balance_residuals(balance)) {
      double m = 0.0, p = 0.0;
      for (double x : r.mass) m = std::max(m, std::abs(x));
      for (double x : r.momentum) p = std::max(p, std::abs(x));
      csv.row(r.t, m, p);
    }
  }

  nlohmann::json meta;
  meta["name"] = config.name;
  meta["potential"] = potential_json(config.potential);
  meta["ic"] = ic_name(config.ic);
  if (const auto* n = std::get_if<LJNoisy>(&config.ic)) meta["seed"] = n->seed;
  meta["N"] = config.N;
  meta["D"] = config.D;
  meta["L"] = config.L;
  meta["M"] = config.M;
  meta["kernel"] = {{"a", config.kernel.a}, {"b", config.kernel.b}, {"eta", config.kernel.eta}};
  meta["method"] = to_string(config.method);
  meta["dt_requested"] = config.dt;
  meta["dt_used"] = report.dt_used;
  meta["dt_halvings"] = report.dt_halvings;
  meta["steps"] = report.steps;
  meta["t_final"] = config.t_final;
  meta["snapshot_times"] = config.snapshot_times;
  meta["operator"] = {{"sigma_max", report.condition.sigma_max},
                      {"sigma_min", report.condition.sigma_min},
                      {"condition", report.condition.condition},
                      {"truncated_count", report.condition.truncated_count},
                      {"retained_condition", report.condition.retained_condition},
                      {"cutoff_relative", config.cutoff_relative},
                      {"normalization", "L2 (singular values scaled by sqrt(N/D))"}};
  meta["max_energy_drift"] = report.max_energy_drift;
  meta["max_momentum_drift"] = report.max_momentum_drift;
  meta["momentum_drift_per_step"] = report.momentum_drift_per_step;
  meta["warnings"] = report.warnings;
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t s = 0; s < report.errors.size(); ++s) {
    const auto& e = report.errors[s];
    snaps.push_back({{"index", s},
                     {"t", e.t},
                     {"csv", report.snapshot_csvs[s].filename().string()},
                     {"err_Tc_closed", error_json(e.Tc_closed)},
                     {"err_Tint_closed", error_json(e.Tint_closed)},
                     {"err_Tc_zero", error_json(e.Tc_zero)},
                     {"err_Tint_zero", error_json(e.Tint_zero)},
                     {"err_J", error_json(e.J)},
                     {"err_v", error_json(e.v)},
                     {"floor_count", e.floor_count}});
  }
  meta["snapshots"] = snaps;
  report.metadata_json = config.output_dir / "run.json";
  std::ofstream(report.metadata_json) << meta.dump(2) << '\n';
  return report;
}

}  // namespace mesochain
