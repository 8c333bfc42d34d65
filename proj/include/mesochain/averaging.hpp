#pragma once

#include <utility>

#include "mesochain/chain.hpp"
#include "mesochain/kernel.hpp"
#include "mesochain/mesh.hpp"
#include "mesochain/potentials.hpp"

namespace mesochain {

// Exact mesoscale averages of particle data. Every kernel sum uses the
// minimal periodic image of x - q_j.

MesoField average_density(const ChainState& state, const WindowKernel& kernel, const Mesh& coarse);
MesoField average_momentum(const ChainState& state, const WindowKernel& kernel, const Mesh& coarse);

/// Nodewise momentum / density. Throws NumericalError at a node with
/// non-positive density (degenerate vacuum).
MesoField average_velocity(const MesoField& density, const MesoField& momentum);

/// T_c(x) = - sum_j (M/N) (v_j - vbar(x))^2 psi_eta(x - q_j). Always <= 0.
MesoField exact_convective_stress(const ChainState& state, const WindowKernel& kernel,
                                  const Mesh& coarse, const MesoField& vbar);

/// T_int(x) = - sum_bonds U'(sep/eps) sep int_0^1 psi_eta(x - q_j - s sep) ds,
/// over all N bonds including the wrap bond. Non-negative for a purely
/// repulsive potential.
MesoField exact_interaction_stress(const ChainState& state, const Potential& pot,
                                   const WindowKernel& kernel, const Mesh& coarse);

struct MicroFields {
  MicroField jacobian;
  MicroField velocity;
};

/// J = h / (q_{j+1} - q_j) at bond midpoints and v_j at particles, each
/// interpolated piecewise-linearly onto the fine mesh. Throws OrderingError.
MicroFields exact_micro_fields(const ChainState& state, const Mesh& fine);

}  // namespace mesochain
