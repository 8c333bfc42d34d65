#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mesochain/errors.hpp"
#include "mesochain/experiments.hpp"

namespace mc = mesochain;

namespace {

void print_condition(const mc::ConditionReport& c) {
  std::cout << "operator: sigma_max=" << c.sigma_max << " sigma_min=" << c.sigma_min
            << " condition=" << c.condition << " truncated=" << c.truncated_count
            << " retained_condition=" << c.retained_condition << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out, const std::string& method,
            const std::string& cache, std::uint64_t seed, bool seed_given, bool quiet) {
  mc::ScenarioConfig config = mc::load_config(config_path);
  if (!out.empty()) config.output_dir = out;
  if (!method.empty()) config.method = mc::parse_method(method);
  if (!cache.empty()) config.cache_dir = cache;
  if (seed_given) mc::set_seed(config, seed);
  mc::Logger log;
  if (!quiet) log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  const mc::RunReport report = mc::run_scenario(config, log);
  print_condition(report.condition);
  std::cout << "dt_used=" << report.dt_used << " steps=" << report.steps
            << " max_energy_drift=" << report.max_energy_drift
            << " momentum_drift_per_step=" << report.momentum_drift_per_step << '\n';
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  std::cout << "wrote " << report.snapshot_csvs.size() << " snapshots to " << report.output_dir.string() << '\n';
  return 0;
}

int cmd_demo(std::uint64_t seed, const std::string& out, double noise, const std::string& cache) {
  mc::DemoOptions opt;
  opt.seed = seed;
  opt.noise_amplitude = noise;
  opt.output_dir = out;
  if (!cache.empty()) opt.cache_dir = cache;
  const mc::DemoReport r = mc::synthetic_deconvolution_demo(opt);
  print_condition(r.condition);
  std::cout << "triangle retention: reconstruction=" << r.triangle_retention_reconstruction
            << " average=" << r.triangle_retention_average << '\n'
            << "noise ratio (rms)=" << r.noise_ratio << " (max)=" << r.noise_ratio_max << '\n'
            << "residual=" << r.residual << " clean_error_l2=" << r.clean_error_l2 << '\n';
  if (r.csv) std::cout << "wrote " << r.csv->string() << '\n';
  return 0;
}

int cmd_precompute(const std::string& config_path, const std::string& cache) {
  mc::ScenarioConfig config = mc::load_config(config_path);
  if (!cache.empty()) config.cache_dir = cache;
  if (!config.cache_dir) config.cache_dir = ".svd_cache";
  mc::OperatorOptions opts;
  opts.cutoff_relative = config.cutoff_relative;
  opts.cache_dir = config.cache_dir;
  const mc::ConvolutionOperator op(config.kernel, mc::Mesh{config.D, config.L},
                                   mc::Mesh{config.N, config.L}, opts);
  print_condition(op.condition_report());
  std::cout << (op.loaded_from_cache() ? "cache hit in " : "cached to ") << config.cache_dir->string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-chain coarse-graining and deconvolution closure experiments"};
  app.require_subcommand(1);

  std::string config_path, out, method, cache;
  std::uint64_t seed = 1;
  bool quiet = false;
  double noise = 0.05;

  auto* run = app.add_subcommand("run", "Run a scenario from a config file");
  run->add_option("--config", config_path, "Scenario config file")->required();
  run->add_option("--out", out, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed for noisy initial conditions");
  run->add_option("--method", method, "svd | zero | landweber:<n> | tikhonov:<alpha> | tikhonov-laplacian:<alpha>");
  run->add_option("--cache", cache, "SVD cache directory (overrides cache_dir)");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  auto* demo = app.add_subcommand("demo", "Synthetic deconvolution demo");
  std::string demo_out = "runs/demo", demo_cache;
  std::uint64_t demo_seed = 1;
  demo->add_option("--seed", demo_seed, "Noise seed")->capture_default_str();
  demo->add_option("--out", demo_out, "Output directory")->capture_default_str();
  demo->add_option("--noise", noise, "Uniform noise amplitude")->capture_default_str();
  demo->add_option("--cache", demo_cache, "SVD cache directory");

  auto* pre = app.add_subcommand("precompute-operator", "Compute and cache the operator SVD");
  std::string pre_config, pre_cache;
  pre->add_option("--config", pre_config, "Scenario config file")->required();
  pre->add_option("--cache", pre_cache, "SVD cache directory (default: cache_dir or .svd_cache)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, out, method, cache, seed, seed_opt->count() > 0, quiet);
    if (*demo) return cmd_demo(demo_seed, demo_out, noise, demo_cache);
    if (*pre) return cmd_precompute(pre_config, pre_cache);
  } catch (const mc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const mc::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
