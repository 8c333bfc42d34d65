#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mesochain/averaging.hpp"
#include "mesochain/errors.hpp"

using namespace mesochain;

namespace {

ChainState lattice(std::size_t N, double L = 1.0, double M = 1.0) {
  ChainState s;
  s.q = init_positions(N, L);
  s.v.assign(N, 0.0);
  s.L = L;
  s.M = M;
  return s;
}

// Lattice with random displacements up to 30% of the spacing and random velocities.
ChainState jittered(std::size_t N, unsigned seed, double L = 1.0, double M = 1.0) {
  ChainState s = lattice(N, L, M);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t j = 0; j < N; ++j) {
    s.q[j] += 0.3 * s.h() * u(rng);
    s.v[j] = u(rng);
  }
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(Density, SingleParticleIsScaledKernel) {
  ChainState s;
  s.q = {0.995};
  s.v = {0.0};
  s.M = 2.0;
  const WindowKernel k{0.5, 1.5, 0.01, 1.0};
  const Mesh coarse{400, 1.0};
  const auto rho = average_density(s, k, coarse);
  for (std::size_t i = 0; i < coarse.count; ++i) {
    const double d = wrap_periodic(coarse.node(i) - 0.995, 1.0);
    EXPECT_NEAR(rho[i], 2.0 * eval_psi_eta(k, d), 1e-12) << i;
  }
}

TEST(Density, UniformLatticeIsFlat) {
  const auto s = lattice(10000, 1.0, 3.0);
  const WindowKernel k{0.5, 1.5, 0.01, 1.0};
  const auto rho = average_density(s, k, Mesh{500, 1.0});
  for (double r : rho.values) EXPECT_NEAR(r, 3.0, 3e-3);
}

TEST(Density, IntegratesToTotalMass) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto s = jittered(3000, seed, 2.0, 1.7);
    const WindowKernel k{0.5, 1.5, 0.02, 2.0};
    const Mesh coarse{800, 2.0};
    const auto rho = average_density(s, k, coarse);
    double mass = 0.0;
    for (double r : rho.values) mass += r * coarse.spacing();
    EXPECT_NEAR(mass, 1.7, 1e-6 * 1.7);
  }
}

TEST(Velocity, ConstantAndZero) {
  auto s = jittered(2000, 4);
  const WindowKernel k{0.5, 1.5, 0.02, 1.0};
  const Mesh coarse{100, 1.0};
  s.v.assign(s.size(), 0.0);
  for (double m : average_momentum(s, k, coarse).values) EXPECT_EQ(m, 0.0);
  s.v.assign(s.size(), -1.25);
  const auto vbar = average_velocity(average_density(s, k, coarse), average_momentum(s, k, coarse));
  for (double v : vbar.values) EXPECT_NEAR(v, -1.25, 1e-13);
}

TEST(Velocity, MomentumIsLinear) {
  auto a = jittered(1500, 5);
  auto b = a;
  auto sum = a;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (std::size_t j = 0; j < a.size(); ++j) {
    b.v[j] = g(rng);
    sum.v[j] = a.v[j] + b.v[j];
  }
  const WindowKernel k{0.5, 1.5, 0.02, 1.0};
  const Mesh coarse{120, 1.0};
  const auto pa = average_momentum(a, k, coarse), pb = average_momentum(b, k, coarse),
             ps = average_momentum(sum, k, coarse);
  for (std::size_t i = 0; i < coarse.count; ++i) EXPECT_NEAR(ps[i], pa[i] + pb[i], 1e-12);
}

TEST(Velocity, VacuumThrows) {
  ChainState s;
  s.q = {0.1, 0.2};
  s.v = {0.0, 0.0};
  const WindowKernel k{0.5, 1.5, 0.01, 1.0};
  const Mesh coarse{50, 1.0};
  EXPECT_THROW(average_velocity(average_density(s, k, coarse), average_momentum(s, k, coarse)),
               NumericalError);
}

TEST(Averages, TranslationEquivariant) {
  const Mesh coarse{200, 1.0};
  const WindowKernel k{0.5, 1.5, 0.02, 1.0};
  const auto s = jittered(2000, 7);
  auto shifted = s;
  const int m = 13;
  for (double& q : shifted.q) q += m * coarse.spacing();
  const auto r0 = average_density(s, k, coarse), r1 = average_density(shifted, k, coarse);
  const auto p0 = average_momentum(s, k, coarse), p1 = average_momentum(shifted, k, coarse);
  for (std::size_t i = 0; i < coarse.count; ++i) {
    EXPECT_NEAR(r1[(i + m) % coarse.count], r0[i], 1e-10);
    EXPECT_NEAR(p1[(i + m) % coarse.count], p0[i], 1e-10);
  }
}

TEST(Averages, GaussianBumpIsSmeared) {
  const double eta = 0.01;
  const auto with = make_initial_state(10000, 1.0, 1.0, GranularGaussian{}, eta);
  GranularGaussian flat{};
  flat.a1 = 0.0;
  const auto without = make_initial_state(10000, 1.0, 1.0, flat, eta);
  const WindowKernel k{0.5, 1.5, eta, 1.0};
  const Mesh coarse{500, 1.0};
  auto vbar = [&](const ChainState& s) {
    return average_velocity(average_density(s, k, coarse), average_momentum(s, k, coarse)).values;
  };
  const auto a = vbar(with), b = vbar(without);
  double bump = 0.0, micro = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) bump = std::max(bump, std::abs(a[i] - b[i]));
  for (std::size_t j = 0; j < with.size(); ++j) micro = std::max(micro, with.v[j] - without.v[j]);
  EXPECT_GT(micro, 0.099);
  // Far below the filter width the bump is a point mass for the kernel:
  // peak ~ a1 * sqrt(2 pi) sigma * psi_eta(0), about a quarter of a1.
  const double sigma = 0.2 * eta;
  const double smeared = 0.1 * std::sqrt(2.0 * M_PI) * sigma / (2.0 * eta);
  EXPECT_NEAR(bump, smeared, 0.02 * smeared);
  EXPECT_LT(bump, 0.3 * 0.1);
}

TEST(ConvectiveStress, RestAndTranslationVanish) {
  auto s = jittered(1000, 8);
  const WindowKernel k{0.5, 1.5, 0.03, 1.0};
  const Mesh coarse{100, 1.0};
  for (double c : {0.0, 2.5}) {
    s.v.assign(s.size(), c);
    const auto vbar = average_velocity(average_density(s, k, coarse), average_momentum(s, k, coarse));
    EXPECT_LT(max_abs(exact_convective_stress(s, k, coarse, vbar).values), 1e-12);
  }
}

TEST(ConvectiveStress, NonPositive) {
  for (unsigned seed : {9u, 10u, 11u}) {
    const auto s = jittered(1000, seed);
    const WindowKernel k{0.5, 1.5, 0.03, 1.0};
    const Mesh coarse{100, 1.0};
    const auto vbar = average_velocity(average_density(s, k, coarse), average_momentum(s, k, coarse));
    for (double t : exact_convective_stress(s, k, coarse, vbar).values) EXPECT_LE(t, 0.0);
  }
}

TEST(ConvectiveStress, TwoParticleClosedForm) {
  // With two particles in the window the sum collapses to
  // -m psi0 psi1 (v0 - v1)^2 / (psi0 + psi1).
  ChainState s;
  s.q = {0.49, 0.515};
  s.v = {0.8, -0.3};
  s.M = 1.4;
  const WindowKernel k{0.5, 1.5, 0.02, 1.0};
  const Mesh coarse{100, 1.0};
  const auto rho = average_density(s, k, coarse);
  const auto mom = average_momentum(s, k, coarse);
  MesoField vbar = rho;
  for (std::size_t i = 0; i < coarse.count; ++i) vbar.values[i] = rho[i] > 0.0 ? mom[i] / rho[i] : 0.0;
  const auto tc = exact_convective_stress(s, k, coarse, vbar);
  int checked = 0;
  for (std::size_t i = 0; i < coarse.count; ++i) {
    const double p0 = eval_psi_eta(k, coarse.node(i) - 0.49);
    const double p1 = eval_psi_eta(k, coarse.node(i) - 0.515);
    if (p0 + p1 == 0.0) continue;
    const double oracle = -0.7 * p0 * p1 * 1.1 * 1.1 / (p0 + p1);
    EXPECT_NEAR(tc[i], oracle, 1e-12 * std::max(1.0, std::abs(oracle)));
    ++checked;
  }
  EXPECT_GT(checked, 3);
}

TEST(InteractionStress, EquilibriumVanishes) {
  const auto s = lattice(2000);
  const WindowKernel k{0.5, 1.5, 0.02, 1.0};
  EXPECT_LT(max_abs(exact_interaction_stress(s, LennardJones{}, k, Mesh{100, 1.0}).values), 1e-9);
}

TEST(InteractionStress, CompressedLatticeIsConstant) {
  // A periodic domain of length alpha with N uniform bonds has every scaled
  // separation equal to alpha. The bonds tile the period, so T_int = -U'(alpha).
  const double alpha = 0.8;
  const Granular g{7.0, 1.5, 1.0};
  const auto s = lattice(1000, alpha);
  const WindowKernel k{0.5, 1.5, 0.02, alpha};
  const auto tint = exact_interaction_stress(s, g, k, Mesh{100, alpha});
  const double expected = -potential_deriv(g, alpha);
  ASSERT_GT(expected, 0.0);
  for (double t : tint.values) EXPECT_NEAR(t, expected, 1e-10 * expected);
}

TEST(InteractionStress, RepulsiveIsNonNegative) {
  const Granular g{3.0, 1.5, 1.0};
  for (unsigned seed : {12u, 13u}) {
    const auto s = jittered(1000, seed);
    const WindowKernel k{0.5, 1.5, 0.03, 1.0};
    for (double t : exact_interaction_stress(s, g, k, Mesh{100, 1.0}).values) EXPECT_GE(t, 0.0);
  }
}

TEST(MicroFields, EquilibriumJacobianIsOne) {
  const auto s = lattice(1000);
  const auto f = exact_micro_fields(s, Mesh{1000, 1.0});
  for (double j : f.jacobian.values) EXPECT_NEAR(j, 1.0, 1e-10);
}

TEST(MicroFields, LocallyCompressedRegion) {
  // Reference X in [0.25, 0.5] is mapped onto a segment of length 0.25*alpha;
  // the remainder is stretched to close the period.
  const double alpha = 0.6;
  const std::size_t N = 4000;
  ChainState s = lattice(N);
  const double end = 0.25 + 0.25 * alpha;
  for (double& q : s.q) {
    if (q <= 0.25) continue;
    if (q <= 0.5) q = 0.25 + alpha * (q - 0.25);
    else q = end + (q - 0.5) * (1.0 - end) / 0.5;
  }
  const Mesh fine{N, 1.0};
  const auto f = exact_micro_fields(s, fine);
  for (std::size_t k = 0; k < N; ++k) {
    const double y = fine.node(k);
    if (y > 0.27 && y < end - 0.02) EXPECT_NEAR(f.jacobian[k], 1.0 / alpha, 1e-9) << y;
  }
}

TEST(MicroFields, JacobianIntegratesToLength) {
  for (unsigned seed : {14u, 15u}) {
    // Smooth deformation with a small amount of lattice-scale jitter.
    auto s = lattice(2000);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& q : s.q) q += 0.05 * std::sin(2 * M_PI * q) / (2 * M_PI) + 0.01 * s.h() * u(rng);
    const Mesh fine{2000, 1.0};
    const auto f = exact_micro_fields(s, fine);
    double sum = 0.0;
    for (double j : f.jacobian.values) sum += j * fine.spacing();
    EXPECT_NEAR(sum, 1.0, 1e-3);
  }
}

TEST(MicroFields, VelocityInterpolatesParticles) {
  auto s = lattice(500);
  for (std::size_t j = 0; j < s.size(); ++j) s.v[j] = std::sin(2 * M_PI * s.q[j]);
  const Mesh fine{500, 1.0};
  const auto f = exact_micro_fields(s, fine);
  for (std::size_t k = 0; k < fine.count; ++k) EXPECT_NEAR(f.velocity[k], s.v[k], 1e-12);
}

TEST(Averages, KernelWiderThanDomainThrows) {
  const auto s = lattice(100);
  const WindowKernel k{0.5, 1.5, 0.4, 1.0};
  EXPECT_THROW(average_density(s, k, Mesh{10, 1.0}), DomainError);
}
