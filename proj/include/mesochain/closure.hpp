#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mesochain/averaging.hpp"
#include "mesochain/deconvolution.hpp"
#include "mesochain/potentials.hpp"

namespace mesochain {

struct Method {
  enum class Kind { svd, zero, landweber, tikhonov };
  Kind kind = Kind::svd;
  int iterations = 0;   // landweber
  double alpha = 0.0;   // tikhonov
  Stabilizer stabilizer = Stabilizer::identity;
};

/// Accepts "svd", "zero", "landweber:<n>", "tikhonov:<alpha>" and
/// "tikhonov-laplacian:<alpha>". Throws ConfigError otherwise.
Method parse_method(const std::string& text);
std::string to_string(const Method& method);

/// Reconstructed micro fields on the fine mesh.
struct Reconstruction {
  MicroField J_rec;
  MicroField v_rec;
  Method method;
  double M = 1.0;
  std::size_t floor_count = 0;     // fine nodes where Q[rho] was raised to the floor
  double min_raw_density = 0.0;    // smallest Q[rho] before flooring
};

struct ReconstructOptions {
  double floor_fraction = 1e-6;  // floor = floor_fraction * M / L
  bool strict = false;           // throw instead of flooring
};

/// J_rec = (L/M) Q[rho_bar] and v_rec = Q[rho_bar v_bar] / Q[rho_bar]. The
/// zero-order method interpolates (L/M) rho_bar and v_bar linearly instead.
/// Q[rho_bar] at or below the floor is raised to it and counted (or throws
/// NumericalError when options.strict is set); v_rec at those nodes is the
/// interpolated average velocity.
Reconstruction reconstruct(const ConvolutionOperator& op, const MesoField& rho_bar,
                           const MesoField& mom_bar, double M, const Method& method,
                           const ReconstructOptions& options = {});

/// Wraps exact micro fields as a reconstruction, for checking the closure
/// quadrature independently of the deconvolution.
Reconstruction from_micro_fields(const MicroFields& fields, double M);

/// -(M/L) sum_k dy (v_rec(y_k) - v_bar(x_i))^2 psi_eta(x_i - y_k) J_rec(y_k).
MesoField closed_convective_stress(const Reconstruction& rec, const MesoField& v_bar,
                                   const WindowKernel& kernel, const Mesh& coarse);

/// -((N-1)/N) sum_k dy U'(L / J_rec(y_k)) int_0^1 psi_eta(x_i - y_k - s h / J_rec(y_k)) ds,
/// with h = L / N. Throws NumericalError if a reconstructed bond would be
/// longer than the periodic domain allows.
MesoField closed_interaction_stress(const Reconstruction& rec, const Potential& pot,
                                    const WindowKernel& kernel, const Mesh& coarse,
                                    std::size_t N);

struct BalanceSnapshot {
  double t = 0.0;
  MesoField rho_bar;
  MesoField mom_bar;
  MesoField v_bar;
  MesoField Tc;
  MesoField Tint;
};

/// Residuals at the midpoint time of two consecutive snapshots:
///   mass:      d_t rho + d_x (rho v)
///   momentum:  d_t (rho v) + d_x (rho v^2) - d_x (Tc - Tint)
/// with forward differences in time and periodic central differences in x
/// of the snapshot-averaged fluxes.
struct BalanceResidual {
  double t = 0.0;
  std::vector<double> mass;
  std::vector<double> momentum;
};

std::vector<BalanceResidual> balance_residuals(const std::vector<BalanceSnapshot>& snapshots);

}  // namespace mesochain
