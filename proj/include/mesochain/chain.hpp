#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mesochain/potentials.hpp"

namespace mesochain {

/// Micro state of a periodic chain on [0, L). Positions are kept unwrapped:
/// q[0] < q[1] < ... < q[N-1] < q[0] + L, so the position interpolant stays
/// monotone even when the chain drifts across the periodic boundary.
struct ChainState {
  double t = 0.0;
  std::vector<double> q;
  std::vector<double> v;
  double M = 1.0;
  double L = 1.0;

  std::size_t size() const { return q.size(); }
  double epsilon() const { return 1.0 / static_cast<double>(q.size()); }
  double h() const { return L / static_cast<double>(q.size()); }
  double particle_mass() const { return M / static_cast<double>(q.size()); }

  /// Separation of bond j, joining particle j to j+1 (the last bond wraps to 0).
  double bond_length(std::size_t j) const {
    return j + 1 < q.size() ? q[j + 1] - q[j] : q[0] + L - q[j];
  }
};

// Initial velocity profiles. Breakpoints and centers are fractions of L.

struct LJDeterministic {};

struct LJNoisy {
  std::uint64_t seed = 0;
  double amplitude = 1e-3;
};

/// Piecewise cubic base profile shared by the granular scenarios.
struct BaseProfile {
  double L1 = 0.2, L2 = 0.4, L3 = 0.7, L4 = 0.9;
  double d2 = 0.3;
};

struct GranularGaussian {
  BaseProfile base{0.2, 0.4, 0.7, 0.9, 0.3};
  double a1 = 0.1;
  double q_star = 0.3;
  double sigma_factor = 0.2;  // standard deviation = sigma_factor * eta * L
};

struct GranularSine {
  BaseProfile base{0.1, 0.2, 0.3, 0.6, 0.3};
  double a2 = 5.0;
  double k = 50.0;
};

using ICSpec = std::variant<LJDeterministic, LJNoisy, GranularGaussian, GranularSine>;

/// Uniform lattice q_j = (j - 1/2) h, j = 1..N. Throws DomainError for N < 2.
std::vector<double> init_positions(std::size_t N, double L);

/// Evaluates the initial velocity profile at the given lattice positions.
std::vector<double> initial_velocities(const ICSpec& spec, std::span<const double> positions,
                                       double eta, double L);

/// v_base of the granular scenarios at a fractional coordinate s = q/L.
double base_velocity(const BaseProfile& p, double s);

/// Builds a state at t = 0 from a lattice and an initial velocity profile.
ChainState make_initial_state(std::size_t N, double L, double M, const ICSpec& spec, double eta);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
double unit_interval(std::uint64_t bits);

/// Nearest-neighbour forces including the periodic wrap bond. Throws
/// OrderingError if two neighbours coincide or are out of order.
std::vector<double> total_forces(const ChainState& state, const Potential& pot);
void total_forces(const ChainState& state, const Potential& pot, std::span<double> out);

/// Throws OrderingError naming the first offending bond.
void check_ordering(const ChainState& state);

double kinetic_energy(const ChainState& state);
/// Hamiltonian sum  sum (eps M / 2) v^2 + eps sum U(sep / eps), conserved by the flow.
double total_energy(const ChainState& state, const Potential& pot);
double total_momentum(const ChainState& state);

/// One velocity Verlet step with acceleration f / (eps M). Recomputes the
/// initial forces; use VerletIntegrator for long runs.
ChainState verlet_step(const ChainState& state, const Potential& pot, double dt);

/// Velocity Verlet with cached forces (one force evaluation per step). The
/// cache is keyed on state.t and size; call reset() after editing positions.
class VerletIntegrator {
 public:
  VerletIntegrator(Potential pot, double dt);

  /// Advances in place. Throws OrderingError on a failed step; the state is
  /// then left at the failed configuration.
  void step(ChainState& state);

  /// Steps until state.t reaches t_target, shortening the final step if
  /// t_target is not a whole number of steps away.
  void advance_to(ChainState& state, double t_target);

  double dt() const { return dt_; }
  const Potential& potential() const { return pot_; }
  void reset() { forces_valid_ = false; }
  std::size_t steps_taken() const { return steps_; }

 private:
  void step_with(ChainState& state, double dt);

  Potential pot_;
  double dt_;
  std::vector<double> forces_;
  bool forces_valid_ = false;
  double forces_t_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace mesochain
