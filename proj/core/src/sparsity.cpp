#include "acsparse/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "acsparse/errors.hpp"
#include "acsparse/objective.hpp"

namespace acsparse {

namespace {

void check_prox_bounds(double tau, double lo, double hi) {
  if (!(lo < 0.0 && 0.0 < hi)) throw InvalidArgument("prox: bounds must satisfy lo < 0 < hi");
  if (!(tau >= 0.0)) throw InvalidArgument("prox: threshold must be nonnegative");
}

double wnorm(const Eigen::VectorXd& v, const Eigen::VectorXd& m) {
  return std::sqrt((v.array().square() * m.array()).sum());
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

double prox_l1_box(double w, double tau, double lo, double hi) {
  check_prox_bounds(tau, lo, hi);
  const double mag = std::abs(w) - tau;
  if (mag <= 0.0) return 0.0;
  return clamp(std::copysign(mag, w), lo, hi);
}

Eigen::VectorXd prox_l1_box(const Eigen::VectorXd& w, double tau, double lo, double hi) {
  check_prox_bounds(tau, lo, hi);
  Eigen::VectorXd z(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) z[i] = prox_l1_box(w[i], tau, lo, hi);
  return z;
}

Eigen::VectorXd prox_group_time_box(const Eigen::VectorXd& w, const Eigen::VectorXd& weights,
                                    double tau, double lo, double hi, double theta_tol) {
  check_prox_bounds(tau, lo, hi);
  if (weights.size() != w.size()) throw ShapeMismatch("prox: weights do not match the slice");
  if (wnorm(w, weights) <= tau) return Eigen::VectorXd::Zero(w.size());
  auto clamped = [&](double theta) {
    return Eigen::VectorXd((theta * w).cwiseMax(lo).cwiseMin(hi));
  };
  if (tau == 0.0) return clamped(1.0);
  // psi(theta) = ||clamp(theta w)|| (1 - theta) / theta - tau is strictly
  // decreasing, positive near 0 and equal to -tau at 1.
  double a = 0.0;
  double b = 1.0;
  int iterations = 0;
  while (b - a > theta_tol) {
    const double mid = 0.5 * (a + b);
    const double psi = wnorm(clamped(mid), weights) * (1.0 - mid) / mid - tau;
    if (psi > 0.0) a = mid;
    else b = mid;
    if (++iterations > 200) throw RootFindFailure("prox: group multiplier bisection stalled");
  }
  return clamped(0.5 * (a + b));
}

SubgradientPair select_subgradient(const Discretization& disc, const ControlPair& u,
                                   const ControlPair& p, const CostWeights& w, SparsityMode mode) {
  disc.check_control(u);
  disc.check_control(p);
  if (mode != SparsityMode::none && (!(w.alpha > 0.0) || !(w.alpha_gamma > 0.0)))
    throw InvalidArgument("subgradient selection needs alpha > 0 and alpha_gamma > 0");
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const Eigen::VectorXd mr = disc.mesh().boundary_weights();
  SubgradientPair lam;
  auto pointwise = [](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp, double alpha) {
    Eigen::VectorXd l(uu.size());
    for (Eigen::Index i = 0; i < uu.size(); ++i) {
      if (uu[i] > 0.0) l[i] = 1.0;
      else if (uu[i] < 0.0) l[i] = -1.0;
      else l[i] = clamp(-pp[i] / alpha, -1.0, 1.0);
    }
    return l;
  };
  auto slice = [](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp, double alpha,
                  const Eigen::VectorXd& m) {
    const double nu_ = wnorm(uu, m);
    if (nu_ > 0.0) return Eigen::VectorXd(uu / nu_);
    return Eigen::VectorXd(-pp / std::max(alpha, wnorm(pp, m)));
  };
  for (int j = 0; j < u.slices(); ++j) {
    BulkField lb = BulkField::zeros(disc.mesh());
    BoundaryField lr = BoundaryField::zeros(disc.mesh());
    if (mode == SparsityMode::full) {
      lb.values = pointwise(u.bulk[j].values, p.bulk[j].values, w.alpha);
      lr.values = pointwise(u.boundary[j].values, p.boundary[j].values, w.alpha_gamma);
    } else if (mode == SparsityMode::time_directional) {
      lb.values = slice(u.bulk[j].values, p.bulk[j].values, w.alpha, mb);
      lr.values = slice(u.boundary[j].values, p.boundary[j].values, w.alpha_gamma, mr);
    }
    lam.bulk.push_back(std::move(lb));
    lam.boundary.push_back(std::move(lr));
  }
  return lam;
}

double stationarity_residual(const Discretization& disc, const ControlPair& u,
                             const ControlPair& p, const SubgradientPair& lambda,
                             const CostWeights& w, const BoxBounds& bounds) {
  disc.check_control(u);
  disc.check_control(p);
  if (lambda.bulk.size() != u.bulk.size() || lambda.boundary.size() != u.boundary.size())
    throw ShapeMismatch("subgradient does not match the control");
  double bulk = 0.0;
  double ring = 0.0;
  for (int j = 0; j < u.slices(); ++j) {
    const Eigen::VectorXd target_b =
        (-(p.bulk[j].values + w.alpha * lambda.bulk[j].values) / w.nu)
            .cwiseMax(bounds.rho_min)
            .cwiseMin(bounds.rho_max);
    bulk = std::max(bulk, (u.bulk[j].values - target_b).cwiseAbs().maxCoeff());
    const Eigen::VectorXd target_r =
        (-(p.boundary[j].values + w.alpha_gamma * lambda.boundary[j].values) / w.nu_gamma)
            .cwiseMax(bounds.rho_gamma_min)
            .cwiseMin(bounds.rho_gamma_max);
    ring = std::max(ring, (u.boundary[j].values - target_r).cwiseAbs().maxCoeff());
  }
  return bulk + ring;
}

SparsityReport audit_sparsity_pattern(const Discretization& disc, const ControlPair& u,
                                      const ControlPair& p, double alpha, double alpha_gamma,
                                      SparsityMode mode, double tol_band) {
  disc.check_control(u);
  disc.check_control(p);
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const Eigen::VectorXd& mr = disc.mesh().boundary_weights();
  const double dt = disc.grid().dt();
  const double band_b = tol_band > 0.0 ? tol_band : 1e-3 * alpha;
  const double band_r = tol_band > 0.0 ? tol_band : 1e-3 * alpha_gamma;
  SparsityReport rep;
  rep.measure_bulk = disc.bulk_measure();
  rep.measure_boundary = disc.boundary_measure();

  auto pointwise = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp, double a,
                       double band, const Eigen::VectorXd& m, double& support, double& violation) {
    for (Eigen::Index i = 0; i < uu.size(); ++i) {
      const double meas = dt * m[i];
      const bool zero = uu[i] == 0.0;
      if (!zero) support += meas;
      const double ap = std::abs(pp[i]);
      if ((zero && ap > a + band) || (!zero && ap < a - band)) violation += meas;
    }
  };
  auto slice = [&](double un, double pn, double a, double band, double meas, double& support,
                   double& violation) {
    const bool zero = un == 0.0;
    if (!zero) support += meas;
    if ((zero && pn > a + band) || (!zero && pn < a - band)) violation += meas;
  };

  for (int j = 0; j < u.slices(); ++j) {
    const double ub = wnorm(u.bulk[j].values, mb);
    const double ur = wnorm(u.boundary[j].values, mr);
    const double pb = wnorm(p.bulk[j].values, mb);
    const double pr = wnorm(p.boundary[j].values, mr);
    rep.control_slice_norms.push_back(ub);
    rep.control_boundary_slice_norms.push_back(ur);
    rep.adjoint_slice_norms.push_back(pb);
    rep.adjoint_boundary_slice_norms.push_back(pr);
    if (mode == SparsityMode::time_directional) {
      slice(ub, pb, alpha, band_b, dt * disc.mesh().area(), rep.support_measure_bulk,
            rep.violation_measure_bulk);
      slice(ur, pr, alpha_gamma, band_r, dt * disc.mesh().boundary_length(),
            rep.support_measure_boundary, rep.violation_measure_boundary);
    } else {
      pointwise(u.bulk[j].values, p.bulk[j].values, alpha, band_b, mb, rep.support_measure_bulk,
                rep.violation_measure_bulk);
      pointwise(u.boundary[j].values, p.boundary[j].values, alpha_gamma, band_r, mr,
                rep.support_measure_boundary, rep.violation_measure_boundary);
    }
  }
  return rep;
}

VanishingThreshold estimate_vanishing_threshold(const Problem& problem, SparsityMode mode,
                                                int random_samples, std::uint64_t seed) {
  const CostWeights& w = problem.weights();
  if (mode == SparsityMode::full && (w.beta3 != 0.0 || w.beta4 != 0.0))
    throw FullModeRequiresA7("A7: full-sparsity threshold needs beta3 = beta4 = 0");
  const Discretization& disc = problem.disc();
  const BoxBounds& box = problem.bounds();

  std::vector<ControlPair> samples;
  samples.push_back(ControlPair::zeros(disc.mesh(), disc.grid()));
  samples.push_back(ControlPair::constant(disc.mesh(), disc.grid(), box.rho_min, box.rho_gamma_min));
  samples.push_back(ControlPair::constant(disc.mesh(), disc.grid(), box.rho_max, box.rho_gamma_max));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(box.rho_min, box.rho_max);
  std::uniform_real_distribution<double> ur(box.rho_gamma_min, box.rho_gamma_max);
  for (int s = 0; s < random_samples; ++s) {
    ControlPair c = ControlPair::zeros(disc.mesh(), disc.grid());
    for (auto& f : c.bulk)
      for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = ub(rng);
    for (auto& g : c.boundary)
      for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = ur(rng);
    samples.push_back(std::move(c));
  }

  const Eigen::VectorXd& mb = disc.bulk_mass();
  const Eigen::VectorXd& mr = disc.mesh().boundary_weights();
  VanishingThreshold out;
  for (const auto& c : samples) {
    const Trajectory y = solve_state(disc, problem.potentials(), problem.y0(), c, problem.solver());
    const AdjointTrajectory adj =
        solve_adjoint(disc, problem.potentials(), y, problem.targets(), w, problem.solver());
    const ControlPair p = adjoint_to_control(disc, adj);
    for (int j = 0; j < p.slices(); ++j) {
      if (mode == SparsityMode::time_directional) {
        out.alpha_star = std::max(out.alpha_star, wnorm(p.bulk[j].values, mb));
        out.alpha_star_gamma = std::max(out.alpha_star_gamma, wnorm(p.boundary[j].values, mr));
      } else {
        out.alpha_star = std::max(out.alpha_star, p.bulk[j].values.cwiseAbs().maxCoeff());
        out.alpha_star_gamma =
            std::max(out.alpha_star_gamma, p.boundary[j].values.cwiseAbs().maxCoeff());
      }
    }
  }
  return out;
}

}  // namespace acsparse
