#include "mesochain/closure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mesochain/errors.hpp"

namespace mesochain {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + ": '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("invalid " + what + ": '" + text + "'");
  return value;
}

}  // namespace

Method parse_method(const std::string& text) {
  Method m;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "svd" || name == "zero") {
    if (colon != std::string::npos) throw ConfigError("method '" + name + "' takes no argument");
    m.kind = name == "svd" ? Method::Kind::svd : Method::Kind::zero;
    return m;
  }
  if (name == "landweber") {
    int n = -1;
    const auto res = std::from_chars(arg.data(), arg.data() + arg.size(), n);
    if (arg.empty() || res.ec != std::errc() || res.ptr != arg.data() + arg.size() || n < 0) {
      throw ConfigError("landweber needs a non-negative iteration count, got '" + arg + "'");
    }
    m.kind = Method::Kind::landweber;
    m.iterations = n;
    return m;
  }
  if (name == "tikhonov" || name == "tikhonov-laplacian") {
    m.kind = Method::Kind::tikhonov;
    m.alpha = parse_number(arg, "tikhonov alpha");
    if (!(m.alpha > 0.0)) throw ConfigError("tikhonov alpha must be positive");
    m.stabilizer = name == "tikhonov" ? Stabilizer::identity : Stabilizer::laplacian;
    return m;
  }
  throw ConfigError("unknown reconstruction method '" + text + "'");
}

std::string to_string(const Method& method) {
  std::ostringstream os;
  switch (method.kind) {
    case Method::Kind::svd: os << "svd"; break;
    case Method::Kind::zero: os << "zero"; break;
    case Method::Kind::landweber: os << "landweber:" << method.iterations; break;
    case Method::Kind::tikhonov:
      os << (method.stabilizer == Stabilizer::identity ? "tikhonov:" : "tikhonov-laplacian:")
         << method.alpha;
      break;
  }
  return os.str();
}

namespace {

Eigen::VectorXd as_vector(const Field& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.size()));
}

std::vector<double> as_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd upsample(const Eigen::VectorXd& coarse_values, const Mesh& coarse, const Mesh& fine) {
  Field f{coarse, Quantity::other, as_std(coarse_values)};
  const auto out = resample(f, fine);
  return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd solve(const ConvolutionOperator& op, const Method& method, const Eigen::VectorXd& gbar) {
  switch (method.kind) {
    case Method::Kind::svd: return min_norm_solve(op, gbar);
    case Method::Kind::tikhonov: return tikhonov_solve(op, gbar, method.alpha, method.stabilizer);
    case Method::Kind::landweber:
      return upsample(landweber_solve(op, gbar, method.iterations), op.coarse(), op.fine());
    case Method::Kind::zero: return upsample(gbar, op.coarse(), op.fine());
  }
  return {};
}

}  // namespace

Reconstruction reconstruct(const ConvolutionOperator& op, const MesoField& rho_bar,
                           const MesoField& mom_bar, double M, const Method& method,
                           const ReconstructOptions& options) {
  if (!(rho_bar.mesh == op.coarse()) || !(mom_bar.mesh == op.coarse())) {
    throw DomainError("reconstruct: fields must live on the operator's coarse mesh");
  }
  const Mesh& fine = op.fine();
  const double L = fine.L;
  Reconstruction rec;
  rec.method = method;
  rec.M = M;

  if (method.kind == Method::Kind::zero) {
    const MesoField v_bar = average_velocity(rho_bar, mom_bar);
    auto J = resample(rho_bar, fine);
    for (double& j : J) j *= L / M;
    rec.J_rec = {fine, Quantity::jacobian, std::move(J)};
    rec.v_rec = {fine, Quantity::velocity, resample(v_bar, fine)};
    rec.min_raw_density = *std::min_element(rho_bar.values.begin(), rho_bar.values.end());
    return rec;
  }

  Eigen::VectorXd q_rho = solve(op, method, as_vector(rho_bar));
  const Eigen::VectorXd q_mom = solve(op, method, as_vector(mom_bar));
  const double floor = options.floor_fraction * M / L;
  rec.min_raw_density = q_rho.minCoeff();
  for (Eigen::Index k = 0; k < q_rho.size(); ++k) {
    if (q_rho(k) > floor) continue;
    if (options.strict) {
      throw NumericalError("reconstruction failure: non-positive reconstructed density at fine node " +
                           std::to_string(k));
    }
    q_rho(k) = floor;
    ++rec.floor_count;
  }
  rec.J_rec = {fine, Quantity::jacobian, as_std(q_rho * (L / M))};
  rec.v_rec = {fine, Quantity::velocity, as_std(q_mom.cwiseQuotient(q_rho))};
  if (rec.floor_count > 0) {
    // Q[rho v] / floor is meaningless; use the interpolated average velocity there.
    const auto v_zero = resample(average_velocity(rho_bar, mom_bar), fine);
    for (std::size_t k = 0; k < fine.count; ++k) {
      if (q_rho(static_cast<Eigen::Index>(k)) == floor) rec.v_rec.values[k] = v_zero[k];
    }
  }
  return rec;
}

Reconstruction from_micro_fields(const MicroFields& fields, double M) {
  Reconstruction rec;
  rec.J_rec = fields.jacobian;
  rec.v_rec = fields.velocity;
  rec.M = M;
  rec.min_raw_density = M / fields.jacobian.mesh.L *
                        *std::min_element(fields.jacobian.values.begin(), fields.jacobian.values.end());
  return rec;
}

MesoField closed_convective_stress(const Reconstruction& rec, const MesoField& v_bar,
                                   const WindowKernel& kernel, const Mesh& coarse) {
  if (!(v_bar.mesh == coarse)) throw DomainError("closed_convective_stress: mesh mismatch");
  const Mesh& fine = rec.J_rec.mesh;
  const double pref = rec.M / fine.L * fine.spacing();
  MesoField tc{coarse, Quantity::stress_convective, std::vector<double>(coarse.count, 0.0)};
  for (std::size_t i = 0; i < coarse.count; ++i) {
    double sum = 0.0;
    for_each_node_near(fine, coarse.node(i), kernel.support_radius(), [&](std::size_t k, double d) {
      const double dv = rec.v_rec[k] - v_bar[i];
      sum += dv * dv * eval_psi_eta(kernel, d) * rec.J_rec[k];
    });
    tc.values[i] = -pref * sum;
  }
  return tc;
}

MesoField closed_interaction_stress(const Reconstruction& rec, const Potential& pot,
                                    const WindowKernel& kernel, const Mesh& coarse,
                                    std::size_t N) {
  if (N < 2) throw DomainError("closed_interaction_stress needs N >= 2");
  const Mesh& fine = rec.J_rec.mesh;
  const double L = fine.L;
  const double h = L / static_cast<double>(N);
  const double pref = -(static_cast<double>(N) - 1.0) / static_cast<double>(N) * fine.spacing();
  const double radius = kernel.support_radius();
  MesoField ti{coarse, Quantity::stress_interaction, std::vector<double>(coarse.count, 0.0)};
  for (std::size_t k = 0; k < fine.count; ++k) {
    const double J = rec.J_rec[k];
    if (!(J > 0.0)) throw NumericalError("closed_interaction_stress: non-positive Jacobian at fine node " + std::to_string(k));
    const double weight = pref * potential_deriv(pot, L / J);
    if (weight == 0.0) continue;
    const double sep = h / J;
    if (!(2.0 * (radius + 0.5 * sep) < L)) {
      throw NumericalError("closed_interaction_stress: reconstructed bond at fine node " +
                           std::to_string(k) + " is longer than the periodic domain allows");
    }
    const double y = fine.node(k);
    const double mid = y + 0.5 * sep;
    for_each_node_near(coarse, mid, radius + 0.5 * sep, [&](std::size_t i, double d) {
      ti.values[i] += weight * bond_weight(kernel, d + 0.5 * sep, 0.0, sep);
    });
  }
  return ti;
}

namespace {

std::vector<double> central_dx(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx);
  return out;
}

}  // namespace

std::vector<BalanceResidual> balance_residuals(const std::vector<BalanceSnapshot>& snapshots) {
  if (snapshots.size() < 2) throw DomainError("balance_residuals needs at least two snapshots");
  const Mesh& mesh = snapshots.front().rho_bar.mesh;
  for (const auto& s : snapshots) {
    for (const Field* f : {&s.rho_bar, &s.mom_bar, &s.v_bar, &s.Tc, &s.Tint}) {
      if (!(f->mesh == mesh)) throw DomainError("balance_residuals: mismatched meshes");
    }
  }
  const double dt = snapshots[1].t - snapshots[0].t;
  if (!(dt > 0.0)) throw DomainError("balance_residuals: snapshot times must increase");
  for (std::size_t s = 1; s < snapshots.size(); ++s) {
    const double step = snapshots[s].t - snapshots[s - 1].t;
    if (std::abs(step - dt) > 1e-9 * dt) throw DomainError("balance_residuals: snapshot interval must be uniform");
  }

  const std::size_t n = mesh.count;
  const double dx = mesh.spacing();
  std::vector<BalanceResidual> out;
  for (std::size_t s = 1; s < snapshots.size(); ++s) {
    const auto& a = snapshots[s - 1];
    const auto& b = snapshots[s];
    std::vector<double> mass_flux(n), mom_flux(n);
    for (std::size_t i = 0; i < n; ++i) {
      mass_flux[i] = 0.5 * (a.mom_bar[i] + b.mom_bar[i]);
      const double fa = a.mom_bar[i] * a.v_bar[i] - (a.Tc[i] - a.Tint[i]);
      const double fb = b.mom_bar[i] * b.v_bar[i] - (b.Tc[i] - b.Tint[i]);
      mom_flux[i] = 0.5 * (fa + fb);
    }
    const auto dmass = central_dx(mass_flux, dx);
    const auto dmom = central_dx(mom_flux, dx);
    BalanceResidual r;
    r.t = 0.5 * (a.t + b.t);
    r.mass.resize(n);
    r.momentum.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      r.mass[i] = (b.rho_bar[i] - a.rho_bar[i]) / dt + dmass[i];
      r.momentum[i] = (b.mom_bar[i] - a.mom_bar[i]) / dt + dmom[i];
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mesochain
