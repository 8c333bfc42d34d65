#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mesochain/averaging.hpp"
#include "mesochain/chain.hpp"
#include "mesochain/closure.hpp"
#include "mesochain/deconvolution.hpp"
#include "mesochain/kernel.hpp"
#include "mesochain/potentials.hpp"

namespace mesochain {

struct ScenarioConfig {
  std::string name = "scenario";
  Potential potential = Granular{};
  std::size_t N = 10000;
  double L = 1.0;
  double M = 1.0;
  WindowKernel kernel{};  // kernel.L follows L
  std::size_t D = 500;
  double dt = 1e-6;
  double t_final = 2.2e-2;
  std::vector<double> snapshot_times;
  ICSpec ic = GranularGaussian{};
  Method method{};
  double cutoff_relative = 1e-12;
  double floor_fraction = 1e-6;
  bool strict_reconstruction = false;
  double energy_tolerance = 1e-4;   // relative drift that triggers a dt halving
  int max_dt_halvings = 3;
  double energy_interval = 1e-4;    // time between energy/momentum samples
  double stress_zero_threshold = 1e-8;
  bool write_fine_fields = true;
  std::filesystem::path output_dir = "runs/scenario";
  std::optional<std::filesystem::path> cache_dir;

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

/// Parses the flat "key = value" format. '#' starts a comment. Unknown keys,
/// duplicate keys and malformed values throw ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& file);

/// "a, b, c" or "start:step:stop" (inclusive of stop up to rounding).
std::vector<double> parse_time_list(const std::string& text);

/// Overrides the seed of a noisy initial condition; no effect otherwise.
void set_seed(ScenarioConfig& config, std::uint64_t seed);

struct ErrorValue {
  double value = 0.0;
  bool absolute = false;  // true when max|exact| was at or below the zero threshold
};

/// max_i |exact_i - approx_i| / max_i |exact_i|; falls back to the absolute
/// maximum error when max|exact| <= zero_threshold. Throws DomainError on
/// mismatched sizes or meshes.
ErrorValue error_linf(const Field& exact, const Field& approx, double zero_threshold = 0.0);
ErrorValue error_linf(std::span<const double> exact, std::span<const double> approx,
                      double zero_threshold = 0.0);

struct SnapshotErrors {
  double t = 0.0;
  ErrorValue Tc_closed, Tc_zero, Tint_closed, Tint_zero, J, v;
  std::size_t floor_count = 0;
  // Closure quadrature check: closed stresses fed with the exact micro fields.
  ErrorValue Tc_exact_fields, Tint_exact_fields;
  double max_Tc_exact = 0.0, max_Tc_closed = 0.0;
  double min_Tint_exact = 0.0, min_Tint_closed = 0.0;
  double mass = 0.0;  // periodic trapezoid integral of rho_bar
};

struct SnapshotAnalysis {
  double t = 0.0;
  MesoField rho_bar, mom_bar, v_bar;
  MesoField Tc_exact, Tc_closed, Tc_zero, Tc_exact_fields;
  MesoField Tint_exact, Tint_closed, Tint_zero, Tint_exact_fields;
  MicroFields exact;
  Reconstruction rec;
  Reconstruction zero;
  SnapshotErrors errors;
};

struct AnalysisSettings {
  Method method{};
  ReconstructOptions reconstruct{};
  double stress_zero_threshold = 1e-8;
};

/// Exact averages and stresses, reconstruction, closed and zero-order
/// stresses, the exact-field check and all error metrics for one state.
SnapshotAnalysis analyze_snapshot(const ChainState& state, const Potential& pot,
                                  const ConvolutionOperator& op, const AnalysisSettings& settings);

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
  double momentum = 0.0;
  double relative_drift = 0.0;
};

struct RunReport {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> snapshot_csvs;
  std::vector<std::filesystem::path> fine_csvs;
  std::filesystem::path errors_csv, diagnostics_csv, energy_csv, balance_csv, metadata_json;
  std::vector<SnapshotErrors> errors;
  std::vector<std::vector<double>> J_rec;  // fine-mesh reconstructed Jacobian per snapshot
  ConditionReport condition;
  std::vector<EnergySample> energy;
  double dt_used = 0.0;
  int dt_halvings = 0;
  std::size_t steps = 0;
  double max_energy_drift = 0.0;
  double max_momentum_drift = 0.0;   // max |P(t) - P(0)|
  double momentum_drift_per_step = 0.0;
  std::vector<std::string> warnings;
};

/// Integrates the chain and analyses every snapshot, writing CSVs and a
/// run metadata file into config.output_dir. Retries with a halved dt on
/// an ordering failure or excessive energy drift. Throws NumericalError
/// (with the snapshot index where relevant) when retries are exhausted.
using Logger = std::function<void(const std::string&)>;

RunReport run_scenario(const ScenarioConfig& config, const Logger& log = {});

struct DemoOptions {
  std::uint64_t seed = 1;
  std::size_t N = 10000;
  std::size_t D = 500;
  double eta = 0.01;
  double noise_amplitude = 0.05;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> cache_dir;
};

struct DemoReport {
  double triangle_retention_reconstruction = 0.0;  // peak / true peak height
  double triangle_retention_average = 0.0;
  double noise_ratio = 0.0;        // RMS of the noise response / RMS of the injected noise
  double noise_ratio_max = 0.0;    // same with max norms
  double residual = 0.0;           // |A g+ - gbar|_inf / |gbar|_inf
  double clean_error_l2 = 0.0;     // relative L2 error of the noise-free reconstruction
  double clean_error_linf = 0.0;
  ConditionReport condition;
  std::optional<std::filesystem::path> csv;
};

/// Trapezoid (meso feature) + narrow triangle (sub-filter feature) + seeded
/// uniform noise on the fine mesh, averaged by A and reconstructed with the
/// truncated-SVD minimum-norm solution.
DemoReport synthetic_deconvolution_demo(const DemoOptions& options);

/// Ground-truth demo profile without noise, evaluated at y.
double demo_profile(double y);

}  // namespace mesochain
