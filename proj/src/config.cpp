#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mesochain/errors.hpp"
#include "mesochain/experiments.hpp"

namespace mesochain {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size() ||
      !std::isfinite(out)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "name", "potential", "lj_depth", "lj_zero_distance", "granular_stiffness",
      "granular_exponent", "granular_range", "N", "L", "M", "eta", "D", "kernel_a", "kernel_b",
      "dt", "t_final", "snapshot_times", "ic", "seed", "noise_amplitude", "gaussian_a1",
      "gaussian_center", "gaussian_sigma_factor", "sine_a2", "sine_k", "base_L1", "base_L2",
      "base_L3", "base_L4", "base_d2", "method", "cutoff", "density_floor",
      "strict_reconstruction", "energy_tolerance", "max_dt_halvings", "energy_interval",
      "stress_zero_threshold", "write_fine_fields", "output_dir", "cache_dir"};
  return keys;
}

}  // namespace

std::vector<double> parse_time_list(const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("snapshot_times: empty list");
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
    if (parts.size() != 3) throw ConfigError("snapshot_times: range must be start:step:stop");
    const double start = to_double("snapshot_times", parts[0]);
    const double step = to_double("snapshot_times", parts[1]);
    const double stop = to_double("snapshot_times", parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("snapshot_times: bad range '" + t + "'");
    const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(t);
  for (std::string item; std::getline(ss, item, ',');) {
    out.push_back(to_double("snapshot_times", trim(item)));
    if (out.size() > 1 && !(out.back() > out[out.size() - 2])) {
      throw ConfigError("snapshot_times must increase: '" + t + "'");
    }
  }
  return out;
}

ScenarioConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }

  std::set<std::string> used;
  auto take = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto number = [&](const std::string& key, double& target) {
    if (const auto* v = take(key)) target = to_double(key, *v);
  };

  ScenarioConfig c;
  if (const auto* v = take("name")) c.name = *v;
  if (const auto* v = take("N")) c.N = to_u64("N", *v);
  number("L", c.L);
  number("M", c.M);
  c.kernel.L = c.L;
  number("eta", c.kernel.eta);
  number("kernel_a", c.kernel.a);
  number("kernel_b", c.kernel.b);
  if (const auto* v = take("D")) c.D = to_u64("D", *v);
  number("dt", c.dt);
  number("t_final", c.t_final);

  const std::string potential = take("potential") ? kv["potential"] : "granular";
  if (potential == "lj") {
    LennardJones lj;
    lj.zero_distance = c.L / std::pow(2.0, 1.0 / 6.0);
    number("lj_depth", lj.depth);
    number("lj_zero_distance", lj.zero_distance);
    c.potential = lj;
  } else if (potential == "granular") {
    Granular g;
    g.range = c.L;
    number("granular_stiffness", g.stiffness);
    number("granular_exponent", g.exponent);
    number("granular_range", g.range);
    c.potential = g;
  } else {
    throw ConfigError("potential must be 'lj' or 'granular', got '" + potential + "'");
  }

  const std::string ic = take("ic") ? kv["ic"] : "granular-gaussian";
  auto base_overrides = [&](BaseProfile& b) {
    number("base_L1", b.L1);
    number("base_L2", b.L2);
    number("base_L3", b.L3);
    number("base_L4", b.L4);
    number("base_d2", b.d2);
  };
  if (ic == "lj-deterministic") {
    c.ic = LJDeterministic{};
  } else if (ic == "lj-noisy") {
    LJNoisy n;
    if (const auto* v = take("seed")) n.seed = to_u64("seed", *v);
    number("noise_amplitude", n.amplitude);
    c.ic = n;
  } else if (ic == "granular-gaussian") {
    GranularGaussian g;
    base_overrides(g.base);
    number("gaussian_a1", g.a1);
    number("gaussian_center", g.q_star);
    number("gaussian_sigma_factor", g.sigma_factor);
    c.ic = g;
  } else if (ic == "granular-sine") {
    GranularSine s;
    base_overrides(s.base);
    number("sine_a2", s.a2);
    number("sine_k", s.k);
    c.ic = s;
  } else {
    throw ConfigError("unknown ic '" + ic + "'");
  }

  if (const auto* v = take("method")) c.method = parse_method(*v);
  number("cutoff", c.cutoff_relative);
  number("density_floor", c.floor_fraction);
  if (const auto* v = take("strict_reconstruction")) c.strict_reconstruction = to_bool("strict_reconstruction", *v);
  number("energy_tolerance", c.energy_tolerance);
  if (const auto* v = take("max_dt_halvings")) c.max_dt_halvings = static_cast<int>(to_u64("max_dt_halvings", *v));
  number("energy_interval", c.energy_interval);
  number("stress_zero_threshold", c.stress_zero_threshold);
  if (const auto* v = take("write_fine_fields")) c.write_fine_fields = to_bool("write_fine_fields", *v);
  c.output_dir = take("output_dir") ? kv["output_dir"] : "runs/" + c.name;
  if (const auto* v = take("cache_dir")) c.cache_dir = *v;
  c.snapshot_times = take("snapshot_times") ? parse_time_list(kv["snapshot_times"])
                                            : parse_time_list("0:1e-3:" + std::to_string(c.t_final));

  for (const auto& [key, value] : kv) {
    if (!used.count(key)) {
      throw ConfigError("key '" + key + "' does not apply to potential '" + potential +
                        "' with ic '" + ic + "'");
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void set_seed(ScenarioConfig& config, std::uint64_t seed) {
  if (auto* noisy = std::get_if<LJNoisy>(&config.ic)) noisy->seed = seed;
}

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(N >= 2, "N must be at least 2");
  require(L > 0.0 && M > 0.0, "L and M must be positive");
  require(D >= 1 && D < N, "D must satisfy 1 <= D < N");
  require(kernel.L == L, "kernel length must equal L");
  try {
    kernel.validate();
    mesochain::validate(potential);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  require(2.0 * kernel.support_radius() < L, "kernel support b*eta must be below L/2");
  require(dt > 0.0, "dt must be positive");
  require(t_final >= 0.0, "t_final must be non-negative");
  require(!snapshot_times.empty(), "snapshot_times must not be empty");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    require(snapshot_times[i] >= 0.0 && snapshot_times[i] <= t_final * (1.0 + 1e-12),
            "snapshot_times must lie in [0, t_final]");
    require(i == 0 || snapshot_times[i] > snapshot_times[i - 1], "snapshot_times must increase");
  }
  require(cutoff_relative >= 0.0 && cutoff_relative < 1.0, "cutoff must lie in [0, 1)");
  require(floor_fraction > 0.0, "density_floor must be positive");
  require(energy_tolerance > 0.0, "energy_tolerance must be positive");
  require(energy_interval > 0.0, "energy_interval must be positive");
  require(stress_zero_threshold >= 0.0, "stress_zero_threshold must be non-negative");
  if (const auto* g = std::get_if<GranularGaussian>(&ic)) {
    const auto& b = g->base;
    require(0.0 < b.L1 && b.L1 < b.L2 && b.L2 < b.L3 && b.L3 < b.L4 && b.L4 < 1.0,
            "base breakpoints must satisfy 0 < L1 < L2 < L3 < L4 < 1 (fractions of L)");
    require(g->sigma_factor > 0.0, "gaussian_sigma_factor must be positive");
  }
  if (const auto* s = std::get_if<GranularSine>(&ic)) {
    const auto& b = s->base;
    require(0.0 < b.L1 && b.L1 < b.L2 && b.L2 < b.L3 && b.L3 < b.L4 && b.L4 < 1.0,
            "base breakpoints must satisfy 0 < L1 < L2 < L3 < L4 < 1 (fractions of L)");
  }
  if (const auto* n = std::get_if<LJNoisy>(&ic)) require(n->amplitude >= 0.0, "noise_amplitude must be non-negative");
}

}  // namespace mesochain
