#include "mesochain/potentials.hpp"

#include <cmath>
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

void require_positive(double xi) {
  if (!(xi > 0.0)) {
    throw DomainError("potential evaluated at non-positive separation " + std::to_string(xi));
  }
}

}  // namespace

void validate(const Potential& pot) {
  std::visit(overloaded{
                 [](const LennardJones& lj) {
                   if (!(lj.depth > 0.0) || !(lj.zero_distance > 0.0)) {
                     throw DomainError("Lennard-Jones depth and zero distance must be positive");
                   }
                 },
                 [](const Granular& g) {
                   if (!(g.stiffness > 0.0) || !(g.range > 0.0)) {
                     throw DomainError("granular stiffness and range must be positive");
                   }
                   if (!(g.exponent > 1.0)) throw DomainError("granular exponent must exceed 1");
                 },
             },
             pot);
}

double potential_energy(const Potential& pot, double xi) {
  require_positive(xi);
  return std::visit(overloaded{
                        [xi](const LennardJones& lj) {
                          const double s6 = std::pow(lj.zero_distance / xi, 6);
                          return 4.0 * lj.depth * (s6 * s6 - s6);
                        },
                        [xi](const Granular& g) {
                          if (xi > g.range) return 0.0;
                          const double p = g.exponent;
                          const double xs = g.range;
                          return g.stiffness * (xs * std::pow(xi, 1.0 - p) / (p - 1.0) +
                                                xi * std::pow(xs, 1.0 - p) -
                                                p / (p - 1.0) * std::pow(xs, 2.0 - p));
                        },
                    },
                    pot);
}

double potential_deriv(const Potential& pot, double xi) {
  require_positive(xi);
  return std::visit(overloaded{
                        [xi](const LennardJones& lj) {
                          const double s6 = std::pow(lj.zero_distance / xi, 6);
                          return 24.0 * lj.depth / xi * (s6 - 2.0 * s6 * s6);
                        },
                        [xi](const Granular& g) {
                          if (xi > g.range) return 0.0;
                          const double xs = g.range;
                          return g.stiffness * (std::pow(xs, 1.0 - g.exponent) -
                                                xs * std::pow(xi, -g.exponent));
                        },
                    },
                    pot);
}

double potential_curvature(const Potential& pot, double xi) {
  require_positive(xi);
  return std::visit(overloaded{
                        [xi](const LennardJones& lj) {
                          const double s6 = std::pow(lj.zero_distance / xi, 6);
                          return 4.0 * lj.depth / (xi * xi) * (156.0 * s6 * s6 - 42.0 * s6);
                        },
                        [xi](const Granular& g) {
                          if (xi > g.range) return 0.0;
                          return g.stiffness * g.exponent * g.range *
                                 std::pow(xi, -g.exponent - 1.0);
                        },
                    },
                    pot);
}

double pair_force(const Potential& pot, double q_i, double q_j, double epsilon) {
  const double d = q_i - q_j;
  if (d == 0.0) throw DomainError("pair_force: coincident particles");
  const double sign = d > 0.0 ? 1.0 : -1.0;
  return -sign * potential_deriv(pot, std::abs(d) / epsilon);
}

double equilibrium_separation(const Potential& pot) {
  return std::visit(overloaded{
                        [](const LennardJones& lj) { return std::pow(2.0, 1.0 / 6.0) * lj.zero_distance; },
                        [](const Granular& g) { return g.range; },
                    },
                    pot);
}

}  // namespace mesochain
