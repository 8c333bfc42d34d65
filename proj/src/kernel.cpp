#include "mesochain/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mesochain/errors.hpp"

namespace mesochain {

void WindowKernel::validate() const {
  if (!(a > 0.0 && a < b)) throw DomainError("window kernel requires 0 < a < b");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("window kernel requires 0 < eta < 1");
  if (!(L > 0.0)) throw DomainError("window kernel requires L > 0");
}

double eval_psi(const WindowKernel& k, double xi) {
  const double r = std::abs(xi);
  if (r <= k.a) return 1.0 / (k.a + k.b);
  if (r < k.b) return (r - k.b) / (k.a * k.a - k.b * k.b);
  return 0.0;
}

double eval_psi_eta(const WindowKernel& k, double x) {
  return eval_psi(k, x / k.eta) / k.eta;
}

namespace {

// Integral of psi over [lo, hi] in scaled units, lo <= hi. psi is linear
// between consecutive breakpoints so the trapezoid rule is exact per piece.
double integrate_psi_scaled(const WindowKernel& k, double lo, double hi) {
  lo = std::max(lo, -k.b);
  hi = std::min(hi, k.b);
  if (!(hi > lo)) return 0.0;
  const std::array<double, 4> breaks{-k.b, -k.a, k.a, k.b};
  double sum = 0.0;
  double left = lo;
  for (double bp : breaks) {
    if (bp <= left) continue;
    const double right = std::min(bp, hi);
    sum += (right - left) * 0.5 * (eval_psi(k, left) + eval_psi(k, right));
    left = right;
    if (left >= hi) break;
  }
  return sum;
}

}  // namespace

double integrate_psi_eta(const WindowKernel& k, double lo, double hi) {
  if (hi < lo) throw DomainError("integrate_psi_eta requires lo <= hi");
  return integrate_psi_scaled(k, lo / k.eta, hi / k.eta);
}

double bond_weight(const WindowKernel& k, double x, double q_left, double q_right) {
  const double start = (x - q_left) / k.eta;       // argument at s = 0
  const double span = (q_right - q_left) / k.eta;  // argument decreases by span
  if (span == 0.0) return eval_psi(k, start) / k.eta;
  const double end = start - span;
  const double lo = std::min(start, end);
  const double hi = std::max(start, end);
  if (lo >= k.b || hi <= -k.b) return 0.0;
  // ds = dxi/|span| and psi_eta = psi/eta.
  return integrate_psi_scaled(k, lo, hi) / std::abs(span) / k.eta;
}

double wrap_periodic(double d, double L) {
  double r = std::fmod(d, L);
  if (r < -0.5 * L) r += L;
  if (r >= 0.5 * L) r -= L;
  return r;
}

}  // namespace mesochain
