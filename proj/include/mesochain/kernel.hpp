#pragma once

// Piecewise-linear window function and its meso-scaled version.
//
//   psi(xi) = 1/(a+b)                    |xi| <= a
//           = (|xi| - b)/(a^2 - b^2)      a < |xi| < b
//           = 0                           |xi| >= b
//
// psi_eta(x) = psi(x/eta)/eta. All breakpoint arithmetic happens in the
// scaled variable xi = x/eta. Periodic wrapping is left to callers.

namespace mesochain {

struct WindowKernel {
  double a = 0.5;     // inner half-width of the flat top (scaled units)
  double b = 1.5;     // outer half-width of the support (scaled units)
  double eta = 0.01;  // meso resolution
  double L = 1.0;     // domain length

  /// Throws DomainError unless 0 < a < b and 0 < eta < 1 and L > 0.
  void validate() const;

  /// Physical half-width of the support of psi_eta.
  double support_radius() const { return b * eta; }
};

double eval_psi(const WindowKernel& k, double xi);
double eval_psi_eta(const WindowKernel& k, double x);

/// Exact integral of psi_eta over [lo, hi] (lo <= hi), summed piecewise over
/// the linear branches so that no antiderivative differences are formed.
double integrate_psi_eta(const WindowKernel& k, double lo, double hi);

/// Exact value of  int_0^1 psi_eta(x - s*q_right - (1-s)*q_left) ds.
/// Returns psi_eta(x - q_left) for a degenerate segment.
double bond_weight(const WindowKernel& k, double x, double q_left, double q_right);

/// Minimal-image representative of d in [-L/2, L/2). A tie at exactly L/2
/// resolves to the negative image.
double wrap_periodic(double d, double L);

}  // namespace mesochain
