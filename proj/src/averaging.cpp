#include "mesochain/averaging.hpp"

#include <algorithm>
#include <string>

#include "mesochain/errors.hpp"

namespace mesochain {

std::vector<double> Mesh::nodes() const {
  std::vector<double> x(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = node(i);
  return x;
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::density: return "density";
    case Quantity::momentum: return "momentum";
    case Quantity::velocity: return "velocity";
    case Quantity::stress_convective: return "stress_convective";
    case Quantity::stress_interaction: return "stress_interaction";
    case Quantity::jacobian: return "jacobian";
    case Quantity::other: return "other";
  }
  return "other";
}

std::vector<double> periodic_interpolate(std::span<const double> nodes,
                                         std::span<const double> values, double L,
                                         std::span<const double> targets) {
  const std::size_t n = nodes.size();
  if (n == 0 || values.size() != n) throw DomainError("periodic_interpolate: size mismatch");
  std::vector<double> out(targets.size());
  const double base = nodes.front();
  for (std::size_t k = 0; k < targets.size(); ++k) {
    double t = targets[k] - base;
    t = base + (t - L * std::floor(t / L));
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    const std::size_t right = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t left = right - 1;  // t >= nodes.front() so right >= 1
    const double xl = nodes[left];
    const double xr = right < n ? nodes[right] : base + L;
    const double vl = values[left];
    const double vr = right < n ? values[right] : values[0];
    const double w = (xr > xl) ? (t - xl) / (xr - xl) : 0.0;
    out[k] = vl + w * (vr - vl);
  }
  return out;
}

std::vector<double> resample(const Field& field, const Mesh& target) {
  const auto src = field.mesh.nodes();
  const auto dst = target.nodes();
  return periodic_interpolate(src, field.values, field.mesh.L, dst);
}

namespace {

void require_kernel_fits(const WindowKernel& kernel, const Mesh& mesh) {
  if (!(2.0 * kernel.support_radius() < mesh.L)) {
    throw DomainError("kernel support must be shorter than half the periodic domain");
  }
}

}  // namespace

MesoField average_density(const ChainState& state, const WindowKernel& kernel, const Mesh& coarse) {
  require_kernel_fits(kernel, coarse);
  MesoField rho{coarse, Quantity::density, std::vector<double>(coarse.count, 0.0)};
  const double m = state.particle_mass();
  const double radius = kernel.support_radius();
  for (double q : state.q) {
    for_each_node_near(coarse, q, radius,
                       [&](std::size_t i, double d) { rho.values[i] += m * eval_psi_eta(kernel, d); });
  }
  return rho;
}

MesoField average_momentum(const ChainState& state, const WindowKernel& kernel, const Mesh& coarse) {
  require_kernel_fits(kernel, coarse);
  MesoField mom{coarse, Quantity::momentum, std::vector<double>(coarse.count, 0.0)};
  const double m = state.particle_mass();
  const double radius = kernel.support_radius();
  for (std::size_t j = 0; j < state.size(); ++j) {
    const double mv = m * state.v[j];
    for_each_node_near(coarse, state.q[j], radius,
                       [&](std::size_t i, double d) { mom.values[i] += mv * eval_psi_eta(kernel, d); });
  }
  return mom;
}

MesoField average_velocity(const MesoField& density, const MesoField& momentum) {
  if (!(density.mesh == momentum.mesh)) throw DomainError("average_velocity: mesh mismatch");
  MesoField vel{density.mesh, Quantity::velocity, std::vector<double>(density.size())};
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!(density[i] > 0.0)) {
      throw NumericalError("degenerate vacuum: non-positive average density at coarse node " +
                           std::to_string(i));
    }
    vel.values[i] = momentum[i] / density[i];
  }
  return vel;
}

MesoField exact_convective_stress(const ChainState& state, const WindowKernel& kernel,
                                  const Mesh& coarse, const MesoField& vbar) {
  if (!(vbar.mesh == coarse)) throw DomainError("exact_convective_stress: mesh mismatch");
  require_kernel_fits(kernel, coarse);
  MesoField tc{coarse, Quantity::stress_convective, std::vector<double>(coarse.count, 0.0)};
  const double m = state.particle_mass();
  const double radius = kernel.support_radius();
  for (std::size_t j = 0; j < state.size(); ++j) {
    const double vj = state.v[j];
    for_each_node_near(coarse, state.q[j], radius, [&](std::size_t i, double d) {
      const double dv = vj - vbar[i];
      tc.values[i] -= m * dv * dv * eval_psi_eta(kernel, d);
    });
  }
  return tc;
}

MesoField exact_interaction_stress(const ChainState& state, const Potential& pot,
                                   const WindowKernel& kernel, const Mesh& coarse) {
  require_kernel_fits(kernel, coarse);
  MesoField ti{coarse, Quantity::stress_interaction, std::vector<double>(coarse.count, 0.0)};
  const std::size_t n = state.size();
  if (n < 2) return ti;
  const double inv_eps = static_cast<double>(n);
  const double radius = kernel.support_radius();
  for (std::size_t j = 0; j < n; ++j) {
    const double sep = state.bond_length(j);
    if (!(sep > 0.0)) throw OrderingError("coincident neighbours at bond " + std::to_string(j), j);
    const double weight = -potential_deriv(pot, sep * inv_eps) * sep;
    if (weight == 0.0) continue;
    const double mid = state.q[j] + 0.5 * sep;
    for_each_node_near(coarse, mid, radius + 0.5 * sep, [&](std::size_t i, double d) {
      // d is x_i - mid, so x_i - q_j = d + sep/2.
      ti.values[i] += weight * bond_weight(kernel, d + 0.5 * sep, 0.0, sep);
    });
  }
  return ti;
}

MicroFields exact_micro_fields(const ChainState& state, const Mesh& fine) {
  check_ordering(state);
  const std::size_t n = state.size();
  const double h = state.h();
  std::vector<double> mids(n), jac(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sep = state.bond_length(j);
    mids[j] = state.q[j] + 0.5 * sep;
    jac[j] = h / sep;
  }
  const auto y = fine.nodes();
  MicroFields out;
  out.jacobian = {fine, Quantity::jacobian, periodic_interpolate(mids, jac, state.L, y)};
  out.velocity = {fine, Quantity::velocity, periodic_interpolate(state.q, state.v, state.L, y)};
  return out;
}

}  // namespace mesochain
