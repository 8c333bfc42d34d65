#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mesochain/kernel.hpp"

namespace mesochain {

/// Uniform periodic mesh on [0, L) with nodes at cell centres (i + 1/2) * L / count.
struct Mesh {
  std::size_t count = 0;
  double L = 1.0;

  double spacing() const { return L / static_cast<double>(count); }
  double node(std::size_t i) const { return (static_cast<double>(i) + 0.5) * spacing(); }
  std::vector<double> nodes() const;

  bool operator==(const Mesh&) const = default;
};

enum class Quantity {
  density,
  momentum,
  velocity,
  stress_convective,
  stress_interaction,
  jacobian,
  other,
};

std::string_view to_string(Quantity q);

/// Samples of a quantity on a mesh. Used both for meso fields (coarse mesh)
/// and micro fields (fine mesh).
struct Field {
  Mesh mesh;
  Quantity quantity = Quantity::other;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

using MesoField = Field;
using MicroField = Field;

/// Calls fn(i, d) for every node i of the mesh whose minimal-image offset
/// d = wrap(x_i - center) satisfies |d| < radius. Requires radius < L/2.
template <class Fn>
void for_each_node_near(const Mesh& mesh, double center, double radius, Fn&& fn) {
  const double dx = mesh.spacing();
  const double c = center - mesh.L * std::floor(center / mesh.L);
  const auto first = static_cast<long long>(std::ceil((c - radius) / dx - 0.5));
  const auto last = static_cast<long long>(std::floor((c + radius) / dx - 0.5));
  const auto n = static_cast<long long>(mesh.count);
  for (long long i = first; i <= last; ++i) {
    const auto idx = static_cast<std::size_t>(((i % n) + n) % n);
    const double d = wrap_periodic(mesh.node(idx) - center, mesh.L);
    if (std::abs(d) < radius) fn(idx, d);
  }
}

/// Periodic piecewise-linear interpolation. `nodes` must be strictly
/// increasing with nodes.back() < nodes.front() + L; values at the targets
/// are interpolated between neighbours, wrapping from the last node to the
/// first node's image at nodes.front() + L.
std::vector<double> periodic_interpolate(std::span<const double> nodes,
                                         std::span<const double> values, double L,
                                         std::span<const double> targets);

/// Linear interpolation of a field from one periodic mesh to another.
std::vector<double> resample(const Field& field, const Mesh& target);

}  // namespace mesochain
