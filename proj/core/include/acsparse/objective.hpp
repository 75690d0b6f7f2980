#pragma once

#include "acsparse/cost.hpp"
#include "acsparse/discretization.hpp"
#include "acsparse/pde_solvers.hpp"
#include "acsparse/problem.hpp"

namespace acsparse {

/// Tracking plus control cost J(y, u), trapezoid in time for the state terms.
double eval_tracking(const Discretization& disc, const Trajectory& traj, const ControlPair& u,
                     const Targets& targets, const CostWeights& w);

/// j(u): alpha ||u||_L1(Q) + alpha_gamma ||u_Gamma||_L1(Sigma) in full mode,
/// the time integral of slice L2 norms in time mode, 0 otherwise.
double eval_sparsity(const Discretization& disc, const ControlPair& u, SparsityMode mode,
                     double alpha, double alpha_gamma);

/// One-sided directional derivative j'(u; v).
double directional_derivative_sparsity(const Discretization& disc, const ControlPair& u,
                                       const ControlPair& v, SparsityMode mode, double alpha,
                                       double alpha_gamma);

/// State, adjoint and smooth gradient at one control.
struct SmoothEvaluation {
  Trajectory state;
  AdjointTrajectory adjoint;
  /// (p + nu u, p_Gamma + nu_gamma u_Gamma).
  ControlPair gradient;
  double cost = 0.0;
  SolveStats stats;
};

SmoothEvaluation evaluate_smooth(const Problem& problem, const ControlPair& u);

/// Reduced smooth cost J(S(u), u).
double smooth_cost(const Problem& problem, const ControlPair& u);
/// Smooth plus sparsity term.
double total_cost(const Problem& problem, const ControlPair& u);
ControlPair smooth_gradient(const Problem& problem, const ControlPair& u);

/// D^2 J_hat(u)[v, w] from two linearized solves and the adjoint.
double quadratic_form_D2J(const Problem& problem, const ControlPair& u, const ControlPair& v,
                          const ControlPair& w);
/// Same, reusing the state and adjoint at u.
double quadratic_form_D2J(const Problem& problem, const SmoothEvaluation& at, const ControlPair& v,
                          const ControlPair& w);
/// Same, with the step operators along the state already factorized.
double quadratic_form_D2J(const Problem& problem, const FrozenOperators& ops,
                          const AdjointTrajectory& adjoint, const ControlPair& v,
                          const ControlPair& w);

}  // namespace acsparse
