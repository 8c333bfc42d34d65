#include "mesochain/chain.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mesochain/errors.hpp"

namespace mesochain {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Smooth bumps of the Lennard-Jones initial velocity.
double lj_profile(double s) {
  double f = 0.0;
  if (s > 1.0 / 3.0 && s < 2.0 / 3.0) {
    const double l = s - 1.0 / 3.0;
    const double r = 2.0 / 3.0 - s;
    f = l * l * r * r / 50.0;
  }
  double lambda = 0.0;
  const double z = s - 0.7;
  if (z > -0.05 && z < 0.05) {
    const double w = 1.0 / 400.0 - z * z;
    lambda = 660.0 * w * w;
  }
  return f + lambda;
}

void require_ordered_breaks(const BaseProfile& p) {
  if (!(p.L1 < p.L2 && p.L2 < p.L3 && p.L3 < p.L4 && p.L4 < 1.0 && p.L1 >= 0.0)) {
    throw DomainError("initial condition breakpoints must satisfy 0 <= L1 < L2 < L3 < L4 < L");
  }
}

}  // namespace

std::vector<double> init_positions(std::size_t N, double L) {
  if (N < 2) throw DomainError("a chain needs at least two particles");
  if (!(L > 0.0)) throw DomainError("domain length must be positive");
  const double h = L / static_cast<double>(N);
  std::vector<double> q(N);
  for (std::size_t j = 0; j < N; ++j) q[j] = (static_cast<double>(j) + 0.5) * h;
  return q;
}

double base_velocity(const BaseProfile& p, double s) {
  const double x1 = 0.5 * (3.0 * p.L2 - p.L1);
  const double x2 = 0.5 * (3.0 * p.L3 - p.L4);
  const double d1 = -2.0 * p.d2 / std::pow(p.L2 - p.L1, 3);
  const double d3 = -2.0 * p.d2 / std::pow(p.L3 - p.L4, 3);
  if (s <= p.L1) return 0.0;
  if (s <= p.L2) return d1 * (s - x1) * (s - p.L1) * (s - p.L1);
  if (s <= p.L3) return p.d2;
  if (s <= p.L4) return d3 * (s - x2) * (s - p.L4) * (s - p.L4);
  return 0.0;
}

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<double> initial_velocities(const ICSpec& spec, std::span<const double> positions,
                                       double eta, double L) {
  std::vector<double> v(positions.size());
  std::visit(
      overloaded{
          [&](const LJDeterministic&) {
            for (std::size_t j = 0; j < v.size(); ++j) v[j] = lj_profile(positions[j] / L);
          },
          [&](const LJNoisy& n) {
            // mt19937_64 is fully specified by the standard, and the bits to
            // double map is ours, so the noise is identical on every platform.
            std::mt19937_64 gen(n.seed);
            for (std::size_t j = 0; j < v.size(); ++j) {
              const double u = unit_interval(gen());
              v[j] = lj_profile(positions[j] / L) + n.amplitude * (2.0 * u - 1.0);
            }
          },
          [&](const GranularGaussian& g) {
            require_ordered_breaks(g.base);
            const double sigma = g.sigma_factor * eta * L;
            const double center = g.q_star * L;
            for (std::size_t j = 0; j < v.size(); ++j) {
              const double d = positions[j] - center;
              v[j] = base_velocity(g.base, positions[j] / L) +
                     g.a1 * std::exp(-d * d / (2.0 * sigma * sigma));
            }
          },
          [&](const GranularSine& g) {
            require_ordered_breaks(g.base);
            const double end = g.base.L4 * L;
            for (std::size_t j = 0; j < v.size(); ++j) {
              const double q = positions[j];
              double pert = 0.0;
              if (q >= 0.0 && q <= end) pert = g.a2 * std::sin(2.0 * std::numbers::pi * g.k * q / end);
              v[j] = base_velocity(g.base, q / L) + pert;
            }
          },
      },
      spec);
  return v;
}

ChainState make_initial_state(std::size_t N, double L, double M, const ICSpec& spec, double eta) {
  if (!(M > 0.0)) throw DomainError("total mass must be positive");
  ChainState s;
  s.L = L;
  s.M = M;
  s.q = init_positions(N, L);
  s.v = initial_velocities(spec, s.q, eta, L);
  return s;
}

void check_ordering(const ChainState& state) {
  const std::size_t n = state.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (!(state.bond_length(j) > 0.0)) {
      throw OrderingError("particle ordering violated at bond " + std::to_string(j) +
                              " (t = " + std::to_string(state.t) + ")",
                          j);
    }
  }
}

void total_forces(const ChainState& state, const Potential& pot, std::span<double> out) {
  const std::size_t n = state.size();
  std::fill(out.begin(), out.end(), 0.0);
  if (n < 2) return;
  const double inv_eps = static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sep = state.bond_length(j);
    if (!(sep > 0.0)) {
      throw OrderingError("coincident or crossed neighbours at bond " + std::to_string(j), j);
    }
    // Force on j from j+1 is +U'(sep/eps); the reaction acts on j+1.
    const double f = potential_deriv(pot, sep * inv_eps);
    out[j] += f;
    out[j + 1 < n ? j + 1 : 0] -= f;
  }
}

std::vector<double> total_forces(const ChainState& state, const Potential& pot) {
  std::vector<double> f(state.size());
  total_forces(state, pot, f);
  return f;
}

double kinetic_energy(const ChainState& state) {
  double sum = 0.0;
  for (double v : state.v) sum += v * v;
  return 0.5 * state.particle_mass() * sum;
}

double total_energy(const ChainState& state, const Potential& pot) {
  const std::size_t n = state.size();
  double pe = 0.0;
  if (n >= 2) {
    const double inv_eps = static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) pe += potential_energy(pot, state.bond_length(j) * inv_eps);
  }
  return kinetic_energy(state) + state.epsilon() * pe;
}

double total_momentum(const ChainState& state) {
  double sum = 0.0;
  for (double v : state.v) sum += v;
  return state.particle_mass() * sum;
}

ChainState verlet_step(const ChainState& state, const Potential& pot, double dt) {
  VerletIntegrator integ(pot, dt);
  ChainState next = state;
  integ.step(next);
  return next;
}

VerletIntegrator::VerletIntegrator(Potential pot, double dt) : pot_(std::move(pot)), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  validate(pot_);
}

void VerletIntegrator::step(ChainState& state) { step_with(state, dt_); }

void VerletIntegrator::step_with(ChainState& state, double dt) {
  const std::size_t n = state.size();
  if (!forces_valid_ || forces_.size() != n || forces_t_ != state.t) {
    forces_.resize(n);
    total_forces(state, pot_, forces_);
    forces_valid_ = true;
  }
  const double half = 0.5 * dt / state.particle_mass();
  for (std::size_t j = 0; j < n; ++j) {
    state.v[j] += half * forces_[j];
    state.q[j] += dt * state.v[j];
  }
  forces_valid_ = false;
  total_forces(state, pot_, forces_);
  forces_valid_ = true;
  for (std::size_t j = 0; j < n; ++j) state.v[j] += half * forces_[j];
  state.t += dt;
  forces_t_ = state.t;
  ++steps_;
}

void VerletIntegrator::advance_to(ChainState& state, double t_target) {
  const double remaining = t_target - state.t;
  if (remaining <= 0.0) return;
  const auto whole = static_cast<long long>(std::floor(remaining / dt_ * (1.0 + 1e-12)));
  const double t0 = state.t;
  for (long long i = 0; i < whole; ++i) step_with(state, dt_);
  const double rest = t_target - (t0 + static_cast<double>(whole) * dt_);
  if (rest > 1e-9 * dt_) step_with(state, rest);
  state.t = t_target;
  forces_t_ = t_target;
}

}  // namespace mesochain
