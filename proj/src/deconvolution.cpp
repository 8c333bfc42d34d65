#include "mesochain/deconvolution.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "mesochain/errors.hpp"

namespace mesochain {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'S', 'V', 'D', 'v', '0', '\n'};
constexpr std::uint32_t kVersion = 1;

Eigen::MatrixXd periodic_kernel_matrix(const WindowKernel& kernel, const Mesh& rows,
                                       const Mesh& cols) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.count),
                                            static_cast<Eigen::Index>(cols.count));
  const double dy = cols.spacing();
  const double radius = kernel.support_radius();
  for (std::size_t i = 0; i < rows.count; ++i) {
    for_each_node_near(cols, rows.node(i), radius, [&](std::size_t k, double d) {
      // d = wrap(y_k - x_i); psi is even.
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = dy * eval_psi_eta(kernel, d);
    });
  }
  return M;
}

// Little-endian raw I/O for scalars and arrays of doubles.
template <class T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <class T>
void put(std::ostream& os, T value) {
  value = to_little(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& value) {
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  value = to_little(value);
  return static_cast<bool>(is);
}

void put_rowmajor(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(os, m(r, c));
}

bool get_rowmajor(std::istream& is, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!get(is, m(r, c))) return false;
  return true;
}

struct Header {
  std::uint64_t D, N;
  double eta, a, b, L;
};

void put_header(std::ostream& os, const Header& h) {
  os.write(kMagic, sizeof kMagic);
  put(os, kVersion);
  put(os, h.D);
  put(os, h.N);
  put(os, h.eta);
  put(os, h.a);
  put(os, h.b);
  put(os, h.L);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

ConvolutionOperator::ConvolutionOperator(const WindowKernel& kernel, const Mesh& coarse,
                                         const Mesh& fine, const OperatorOptions& options)
    : kernel_(kernel), coarse_(coarse), fine_(fine), cutoff_relative_(options.cutoff_relative) {
  kernel_.validate();
  if (coarse.count == 0 || coarse.count >= fine.count) {
    throw DomainError("convolution operator requires 0 < D < N");
  }
  if (coarse.L != fine.L || coarse.L != kernel.L) {
    throw DomainError("convolution operator: meshes and kernel disagree on L");
  }
  if (!(2.0 * kernel.support_radius() < coarse.L)) {
    throw DomainError("kernel support must be shorter than half the periodic domain");
  }
  if (!(cutoff_relative_ >= 0.0)) throw DomainError("cutoff must be non-negative");

  A_ = periodic_kernel_matrix(kernel_, coarse_, fine_);
  R_ = periodic_kernel_matrix(kernel_, coarse_, coarse_);

  std::filesystem::path file;
  if (options.cache_dir) file = *options.cache_dir / ("svd_" + cache_key() + ".bin");
  if (!file.empty() && std::filesystem::exists(file) && load_cache(file)) {
    from_cache_ = true;
    return;
  }
  compute_svd();
  if (!file.empty()) save_cache(file);
}

void ConvolutionOperator::compute_svd() {
  // A^T = Q R with Q (N x D) orthonormal, so A = R^T Q^T and the SVD of the
  // small D x D factor R^T = U S W^T gives A = U S (Q W)^T.
  const Eigen::Index D = A_.rows();
  const Eigen::Index N = A_.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A_.transpose());
  const Eigen::MatrixXd r = qr.matrixQR().topRows(D).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(r.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  sigma_ = svd.singularValues();
  U_ = svd.matrixU();
  V_ = qr.householderQ() * (Eigen::MatrixXd::Identity(N, D) * svd.matrixV());
  if (!sigma_.allFinite() || !U_.allFinite() || !V_.allFinite()) {
    throw NumericalError("SVD of the convolution operator produced non-finite values");
  }
}

double ConvolutionOperator::normalization() const {
  return std::sqrt(static_cast<double>(fine_.count) / static_cast<double>(coarse_.count));
}

ConditionReport ConvolutionOperator::condition_report() const {
  ConditionReport rep;
  const double scale = normalization();
  const Eigen::Index D = sigma_.size();
  rep.sigma_max = sigma_(0) * scale;
  rep.sigma_min = sigma_(D - 1) * scale;
  rep.condition = sigma_(D - 1) > 0.0 ? sigma_(0) / sigma_(D - 1)
                                      : std::numeric_limits<double>::infinity();
  const double cut = cutoff();
  double smallest_kept = sigma_(0);
  for (Eigen::Index j = 0; j < D; ++j) {
    if (sigma_(j) < cut) {
      ++rep.truncated_count;
    } else {
      smallest_kept = sigma_(j);
    }
  }
  rep.retained_condition = sigma_(0) / smallest_kept;
  return rep;
}

std::string ConvolutionOperator::cache_key() const {
  std::ostringstream header;
  put_header(header, {coarse_.count, fine_.count, kernel_.eta, kernel_.a, kernel_.b, kernel_.L});
  std::ostringstream name;
  name << std::hex << std::setw(16) << std::setfill('0') << fnv1a(header.str());
  return name.str();
}

bool ConvolutionOperator::load_cache(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return false;
  std::uint32_t version = 0;
  Header h{};
  if (!get(in, version) || version != kVersion) return false;
  if (!get(in, h.D) || !get(in, h.N) || !get(in, h.eta) || !get(in, h.a) || !get(in, h.b) ||
      !get(in, h.L)) {
    return false;
  }
  if (h.D != coarse_.count || h.N != fine_.count || h.eta != kernel_.eta || h.a != kernel_.a ||
      h.b != kernel_.b || h.L != kernel_.L) {
    return false;
  }
  const auto D = static_cast<Eigen::Index>(h.D);
  const auto N = static_cast<Eigen::Index>(h.N);
  Eigen::VectorXd s(D);
  for (Eigen::Index j = 0; j < D; ++j)
    if (!get(in, s(j))) return false;
  Eigen::MatrixXd u(D, D), v(N, D);
  if (!get_rowmajor(in, u) || !get_rowmajor(in, v)) return false;
  sigma_ = std::move(s);
  U_ = std::move(u);
  V_ = std::move(v);
  return true;
}

void ConvolutionOperator::save_cache(const std::filesystem::path& file) const {
  std::filesystem::create_directories(file.parent_path());
  // Write to a temporary name first so a crashed run never leaves a truncated cache.
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write SVD cache " + tmp.string());
    put_header(out, {coarse_.count, fine_.count, kernel_.eta, kernel_.a, kernel_.b, kernel_.L});
    for (Eigen::Index j = 0; j < sigma_.size(); ++j) put(out, sigma_(j));
    put_rowmajor(out, U_);
    put_rowmajor(out, V_);
    if (!out) throw NumericalError("failed writing SVD cache " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

Eigen::VectorXd min_norm_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar,
                               std::optional<double> cutoff_relative) {
  const auto& s = op.singular_values();
  if (gbar.size() != s.size()) throw DomainError("min_norm_solve: gbar length must equal D");
  const double cut = cutoff_relative.value_or(op.cutoff_relative()) * s(0);
  Eigen::VectorXd coeff = op.left_vectors().transpose() * gbar;
  for (Eigen::Index j = 0; j < s.size(); ++j) coeff(j) = s(j) >= cut && s(j) > 0.0 ? coeff(j) / s(j) : 0.0;
  return op.right_vectors() * coeff;
}

Eigen::VectorXd landweber_solve(const Eigen::MatrixXd& R, const Eigen::VectorXd& gbar, int n) {
  if (n < 0) throw DomainError("landweber_solve: n must be non-negative");
  if (R.rows() != R.cols() || R.rows() != gbar.size()) {
    throw DomainError("landweber_solve: operator must be square and match gbar");
  }
  // g_{k+1} = gbar + (I - R) g_k reproduces the partial sums of the Neumann series.
  Eigen::VectorXd g = gbar;
  for (int k = 0; k < n; ++k) g = gbar + g - R * g;
  return g;
}

Eigen::VectorXd landweber_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar, int n) {
  return landweber_solve(op.square(), gbar, n);
}

namespace {

Eigen::VectorXd periodic_second_difference(const Eigen::VectorXd& g) {
  const Eigen::Index n = g.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k) = g((k + 1) % n) - 2.0 * g(k) + g((k + n - 1) % n);
  }
  return out;
}

// When s = N / D is an integer, A keeps every s-th row of the fine circulant
// with first column c_j = A(0, -j mod N). In the discrete Fourier basis
// A^T A couples only the modes m, m + D, m + 2D, ..., with entries
// conj(c_m) c_m' / s, and C^T C is diagonal, so the normal equations split
// into D Hermitian blocks of size s.
Eigen::VectorXd laplacian_fourier_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs,
                                        double weight) {
  const Eigen::Index D = A.rows();
  const Eigen::Index N = A.cols();
  const Eigen::Index s = N / D;
  std::vector<double> column(static_cast<std::size_t>(N)), rhs_vec(rhs.data(), rhs.data() + N);
  for (Eigen::Index j = 0; j < N; ++j) column[static_cast<std::size_t>(j)] = A(0, (N - j) % N);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> c_hat, b_hat;
  fft.fwd(c_hat, column);
  fft.fwd(b_hat, rhs_vec);

  std::vector<std::complex<double>> x_hat(static_cast<std::size_t>(N));
  Eigen::MatrixXcd block(s, s);
  Eigen::VectorXcd b(s);
  for (Eigen::Index r = 0; r < D; ++r) {
    for (Eigen::Index i = 0; i < s; ++i) {
      const auto mi = static_cast<std::size_t>(r + i * D);
      for (Eigen::Index j = 0; j < s; ++j) {
        block(i, j) = std::conj(c_hat[mi]) * c_hat[static_cast<std::size_t>(r + j * D)] / static_cast<double>(s);
      }
      const double lap = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(mi) / static_cast<double>(N));
      block(i, i) += weight * lap * lap;
      b(i) = b_hat[mi];
    }
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(block);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() == 0.0) {
      throw NumericalError("tikhonov_solve: singular regularized system");
    }
    const Eigen::VectorXcd x = ldlt.solve(b);
    for (Eigen::Index i = 0; i < s; ++i) x_hat[static_cast<std::size_t>(r + i * D)] = x(i);
  }
  std::vector<double> g;
  fft.inv(g, x_hat);
  return Eigen::Map<const Eigen::VectorXd>(g.data(), N);
}

}  // namespace

Eigen::VectorXd tikhonov_solve(const ConvolutionOperator& op, const Eigen::VectorXd& gbar,
                               double alpha, Stabilizer stabilizer) {
  const Eigen::MatrixXd& A = op.matrix();
  if (gbar.size() != A.rows()) throw DomainError("tikhonov_solve: gbar length must equal D");
  if (!(alpha > 0.0)) throw DomainError("tikhonov_solve: alpha must be positive");
  // Dividing the functional by dx turns the weight into alpha * dy/dx on the
  // Euclidean norms.
  const double weight = alpha * op.fine().spacing() / op.coarse().spacing();

  if (stabilizer == Stabilizer::identity) {
    // g = A^T (A A^T + weight I)^{-1} gbar, a D x D solve.
    Eigen::MatrixXd gram = A * A.transpose();
    gram.diagonal().array() += weight;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("tikhonov_solve: singular regularized system");
    return A.transpose() * llt.solve(gbar);
  }

  const Eigen::VectorXd rhs = A.transpose() * gbar;
  if (op.fine().count % op.coarse().count == 0) return laplacian_fourier_solve(A, rhs, weight);

  // Preconditioned conjugate gradients on (A^T A + weight C^T C) g = A^T gbar.
  // The preconditioner is the Fourier-diagonal part of the operator,
  // |A f_m|^2 / N + weight * lambda_m, exact up to aliasing between modes.
  const Eigen::Index N = A.cols();
  Eigen::FFT<double> fft;
  std::vector<double> precond(static_cast<std::size_t>(N), 0.0);
  {
    std::vector<double> row(static_cast<std::size_t>(N));
    std::vector<std::complex<double>> row_hat;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      for (Eigen::Index k = 0; k < N; ++k) row[static_cast<std::size_t>(k)] = A(i, k);
      fft.fwd(row_hat, row);
      for (std::size_t m = 0; m < precond.size(); ++m) precond[m] += std::norm(row_hat[m]);
    }
    for (std::size_t m = 0; m < precond.size(); ++m) {
      const double lap = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(N));
      precond[m] = precond[m] / static_cast<double>(N) + weight * lap * lap;
      if (!(precond[m] > 0.0)) throw NumericalError("tikhonov_solve: singular regularized system");
    }
  }
  auto precondition = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    std::vector<double> in(r.data(), r.data() + N), out;
    std::vector<std::complex<double>> hat;
    fft.fwd(hat, in);
    for (std::size_t m = 0; m < hat.size(); ++m) hat[m] /= precond[m];
    fft.inv(out, hat);
    return Eigen::Map<const Eigen::VectorXd>(out.data(), N);
  };
  auto apply = [&](const Eigen::VectorXd& g) -> Eigen::VectorXd {
    return A.transpose() * (A * g) + weight * periodic_second_difference(periodic_second_difference(g));
  };
  Eigen::VectorXd g = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  double rr = r.squaredNorm();
  const double tol2 = 1e-24 * std::max(rhs.squaredNorm(), std::numeric_limits<double>::min());
  const int max_iter = static_cast<int>(std::max<Eigen::Index>(2000, 4 * N));
  for (int it = 0; it < max_iter && rr > tol2; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) throw NumericalError("tikhonov_solve: singular regularized system");
    const double step = rz / pAp;
    g += step * p;
    r -= step * Ap;
    z = precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    rr = r.squaredNorm();
  }
  if (rr > tol2 * 1e8) throw NumericalError("tikhonov_solve: conjugate gradients did not converge");
  return g;
}

}  // namespace mesochain
