#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mesochain/kernel.hpp"
#include "mesochain/mesh.hpp"

namespace mesochain {

struct ConditionReport {
  double sigma_max = 0.0;  // L2-normalized singular values (see ConvolutionOperator)
  double sigma_min = 0.0;
  double condition = 0.0;  // sigma_max / sigma_min over all D values
  std::size_t truncated_count = 0;
  double retained_condition = 0.0;  // sigma_max / smallest retained value
};

struct OperatorOptions {
  /// Singular values below cutoff_relative * sigma_1 are dropped by min_norm_solve.
  double cutoff_relative = 1e-12;
  /// Directory for the SVD disk cache; no caching when empty.
  std::optional<std::filesystem::path> cache_dir;
};

/// Two-mesh quadrature of the periodic convolution with psi_eta:
///   A(i, k) = dy * psi_eta(wrap(x_i - y_k)),  dy = L / N,
/// mapping N fine samples to D coarse samples (rows sum to ~1).
///
/// Singular values are stored for the Euclidean matrix. Reports quote them
/// in the L2-normalized convention, where vectors are weighted by their mesh
/// spacing; that multiplies every value by sqrt(N / D) and puts sigma_1 near 1.
/// The minimum-norm solution is the same in both conventions.
class ConvolutionOperator {
 public:
  ConvolutionOperator(const WindowKernel& kernel, const Mesh& coarse, const Mesh& fine,
                      const OperatorOptions& options = {});

  const WindowKernel& kernel() const { return kernel_; }
  const Mesh& coarse() const { return coarse_; }
  const Mesh& fine() const { return fine_; }
  const Eigen::MatrixXd& matrix() const { return A_; }

  /// Coarse-to-coarse version R(i, k) = dx * psi_eta(wrap(x_i - x_k)).
  const Eigen::MatrixXd& square() const { return R_; }

  const Eigen::VectorXd& singular_values() const { return sigma_; }
  const Eigen::MatrixXd& left_vectors() const { return U_; }    // D x D
  const Eigen::MatrixXd& right_vectors() const { return V_; }   // N x D
  double normalization() const;  // sqrt(N / D)

  double cutoff() const { return cutoff_relative_ * sigma_(0); }
  double cutoff_relative() const { return cutoff_relative_; }
  bool loaded_from_cache() const { return from_cache_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& fine_values) const { return A_ * fine_values; }

  ConditionReport condition_report() const;

 private:
  void compute_svd();
  std::string cache_key() const;
  bool load_cache(const std::filesystem::path& file);
  void save_cache(const std::filesystem::path& file) const;

  WindowKernel kernel_;
  Mesh coarse_;
  Mesh fine_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd R_;
  Eigen::VectorXd sigma_;
  Eigen::MatrixXd U_;
  Eigen::MatrixXd V_;
  double cutoff_relative_;
  bool from_cache_ = false;
};

/// Truncated-SVD minimum-norm solution  sum_{sigma_j >= cutoff} (<gbar, u_j> / sigma_j) v_j.
/// The cutoff is relative to sigma_1; the operator's own cutoff is used when
/// none is given. Throws DomainError when gbar has the wrong length.
Eigen::VectorXd min_norm_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar,
                               std::optional<double> cutoff_relative = std::nullopt);

/// Landweber partial sums  g_n = sum_{k=0}^n (I - R)^k gbar  on the square
/// coarse operator R. Returns a coarse (D) vector.
Eigen::VectorXd landweber_solve(const Eigen::MatrixXd& R, const Eigen::VectorXd& gbar, int n);
Eigen::VectorXd landweber_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar, int n);

enum class Stabilizer { identity, laplacian };

/// Minimizes |A g - gbar|^2 dx + alpha |C g|^2 dy over fine vectors g, with
/// C the identity or the periodic (1, -2, 1) difference stencil. In the
/// identity case this is the spectral filter sigma^2 / (sigma^2 + alpha) in
/// the L2-normalized singular values. Throws NumericalError if the
/// regularized system cannot be solved.
Eigen::VectorXd tikhonov_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar,
                               double alpha, Stabilizer stabilizer = Stabilizer::identity);

}  // namespace mesochain
