#pragma once

#include <cstdint>
#include <vector>

#include "acsparse/cost.hpp"
#include "acsparse/discretization.hpp"
#include "acsparse/problem.hpp"

namespace acsparse {

/// Pointwise clamp(soft_threshold(w, tau), lo, hi). Requires lo < 0 < hi.
double prox_l1_box(double w, double tau, double lo, double hi);
Eigen::VectorXd prox_l1_box(const Eigen::VectorXd& w, double tau, double lo, double hi);

/// Minimizer of 1/2 ||z - w||^2 + tau ||z|| + box indicator, all norms
/// weighted by `weights`. The solution is clamp(theta w) with theta found by
/// bisection on the group multiplier.
Eigen::VectorXd prox_group_time_box(const Eigen::VectorXd& w, const Eigen::VectorXd& weights,
                                    double tau, double lo, double hi, double theta_tol = 1e-12);

/// lambda in the subdifferential of the sparsity functional.
struct SubgradientPair {
  std::vector<BulkField> bulk;
  std::vector<BoundaryField> boundary;
};

/// Forced value where u (or its slice) is nonzero; elsewhere the choice
/// that minimizes the projection-formula residual.
SubgradientPair select_subgradient(const Discretization& disc, const ControlPair& u,
                                   const ControlPair& p, const CostWeights& w, SparsityMode mode);

/// ||u - clamp(-(p + alpha lambda)/nu)||_inf over Q plus the Sigma analogue.
/// p holds the adjoint slices (see adjoint_to_control).
double stationarity_residual(const Discretization& disc, const ControlPair& u,
                             const ControlPair& p, const SubgradientPair& lambda,
                             const CostWeights& w, const BoxBounds& bounds);

struct SparsityReport {
  /// Space-time measure of {u != 0} and {u_Gamma != 0}.
  double support_measure_bulk = 0.0;
  double support_measure_boundary = 0.0;
  /// Measure of points (or slices) where u = 0 <=> |p| <= alpha fails
  /// outside the band [alpha - tol_band, alpha + tol_band].
  double violation_measure_bulk = 0.0;
  double violation_measure_boundary = 0.0;
  double measure_bulk = 0.0;
  double measure_boundary = 0.0;
  std::vector<double> control_slice_norms;
  std::vector<double> control_boundary_slice_norms;
  std::vector<double> adjoint_slice_norms;
  std::vector<double> adjoint_boundary_slice_norms;

  double violation_measure() const { return violation_measure_bulk + violation_measure_boundary; }
};

/// tol_band <= 0 selects 1e-3 * alpha (and 1e-3 * alpha_gamma on Sigma).
SparsityReport audit_sparsity_pattern(const Discretization& disc, const ControlPair& u,
                                      const ControlPair& p, double alpha, double alpha_gamma,
                                      SparsityMode mode, double tol_band = 0.0);

struct VanishingThreshold {
  double alpha_star = 0.0;
  double alpha_star_gamma = 0.0;
};

/// Upper proxy for the sparsity parameters above which optimal controls
/// vanish: the largest adjoint sup norm (full mode) or slice L2 norm (time
/// mode) over u = 0, the constant box corners and `random_samples` seeded
/// random box controls. Full mode requires beta3 = beta4 = 0.
VanishingThreshold estimate_vanishing_threshold(const Problem& problem, SparsityMode mode,
                                                int random_samples = 4, std::uint64_t seed = 0);

}  // namespace acsparse
