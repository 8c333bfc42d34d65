#pragma once

#include <variant>

namespace mesochain {

/// 4 depth [(sigma/xi)^12 - (sigma/xi)^6]. The default zero distance puts
/// the minimum at the scaled lattice spacing xi = L = 1.
struct LennardJones {
  double depth = 0.25;
  double zero_distance = 0.8908987181403393;  // 2^(-1/6)
};

/// Purely repulsive finite-range contact potential
///   U(xi) = C [ x* xi^(1-p)/(p-1) + xi x*^(1-p) - p/(p-1) x*^(2-p) ],  xi <= x*
///   U(xi) = 0,                                                         xi >  x*
/// with U(x*) = U'(x*) = 0 and U' < 0 on (0, x*).
struct Granular {
  double stiffness = 0.01;
  double exponent = 1.5;
  double range = 1.0;
};

using Potential = std::variant<LennardJones, Granular>;

/// Throws DomainError on invalid parameters (depth, sigma, C, range <= 0; p <= 1).
void validate(const Potential& pot);

/// U(xi) for a scaled separation xi = |q_i - q_j| / epsilon > 0.
double potential_energy(const Potential& pot, double xi);

/// dU/dxi at a scaled separation xi > 0.
double potential_deriv(const Potential& pot, double xi);

/// Second derivative; used for stability estimates of the integrator.
double potential_curvature(const Potential& pot, double xi);

/// Force on particle i exerted by particle j,
///   f_ij = -sign(q_i - q_j) U'(|q_i - q_j| / epsilon).
double pair_force(const Potential& pot, double q_i, double q_j, double epsilon);

/// Scaled separation at which the potential has zero force and the chain is
/// in equilibrium (LJ minimum, granular contact range).
double equilibrium_separation(const Potential& pot);

}  // namespace mesochain
