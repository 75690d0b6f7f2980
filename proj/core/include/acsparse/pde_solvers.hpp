#pragma once

#include <memory>
#include <vector>

#include "acsparse/cost.hpp"
#include "acsparse/discretization.hpp"
#include "acsparse/potentials.hpp"

namespace acsparse {

struct SolverOptions {
  /// Newton stops once the nodal residual, divided by the lumped mass, is
  /// below this value in the max norm.
  double newton_tol = 1e-13;
  int max_newton_iterations = 60;
  int max_halvings = 60;
  /// Iterates of logarithmic runs are kept in [-1 + guard, 1 - guard].
  double newton_guard = 1e-6;
  /// Tolerance of the iterative fallback for linear systems.
  double lin_tol = 1e-14;
};

struct SolveStats {
  int newton_iterations = 0;
  /// Trial steps rejected because they left the guarded interval.
  int guard_rejections = 0;
  /// Trial steps rejected because the residual did not decrease.
  int residual_halvings = 0;
  double max_residual = 0.0;
};

/// M_Omega f^(order)(y) + M_Gamma f_Gamma^(order)(y) at every node.
Eigen::VectorXd reaction(const Discretization& disc, const PotentialPair& pots,
                         const Eigen::VectorXd& y, int order);

/// Nodal residual of one implicit Euler step prev -> next driven by control
/// slice `slice`:
///   M (next - prev) / dt + K next + N(next) - B u.
/// Entry i is the weak form tested against the nodal basis field of node i.
Eigen::VectorXd step_residual(const Discretization& disc, const PotentialPair& pots,
                              const CoupledField& prev, const CoupledField& next,
                              const ControlPair& u, int slice);

/// Weak residual of one step tested against an arbitrary coupled field.
double weak_form_residual(const Discretization& disc, const PotentialPair& pots,
                          const Trajectory& traj, const ControlPair& u, int step,
                          const CoupledField& test);

/// Largest nodal weak residual over all steps.
double max_weak_form_residual(const Discretization& disc, const PotentialPair& pots,
                              const Trajectory& traj, const ControlPair& u);

/// Implicit Euler for the state system with a damped Newton solve per step.
Trajectory solve_state(const Discretization& disc, const PotentialPair& pots,
                       const CoupledField& y0, const ControlPair& u,
                       const SolverOptions& opts = {}, SolveStats* stats = nullptr);

/// Step operators M/dt + K + diag(N'(y^k)), k = 1..n_t, factorized once along
/// a base trajectory and shared by the linearized, bilinearized and adjoint
/// solvers.
class FrozenOperators {
 public:
  FrozenOperators(const Discretization& disc, const PotentialPair& pots, const Trajectory& base,
                  const SolverOptions& opts = {});

  const Discretization& disc() const { return *disc_; }
  const Trajectory& base() const { return *base_; }
  Eigen::VectorXd solve(int k, const Eigen::VectorXd& rhs) const;
  /// M_Omega f'''(y^k) + M_Gamma f_Gamma'''(y^k).
  const Eigen::VectorXd& third(int k) const { return third_[k]; }

 private:
  const Discretization* disc_;
  const Trajectory* base_;
  std::vector<std::unique_ptr<CoupledKernel>> kernels_;
  std::vector<Eigen::VectorXd> third_;
};

/// xi = DS(u)[h]; zero initial datum.
Trajectory solve_linearized(const FrozenOperators& ops, const ControlPair& h);
Trajectory solve_linearized(const Discretization& disc, const PotentialPair& pots,
                            const Trajectory& base, const ControlPair& h,
                            const SolverOptions& opts = {});

/// eta = D^2S(u)[h, k] from phi = DS(u)[h] and psi = DS(u)[k]; zero initial
/// datum, source -N''(y) phi psi.
Trajectory solve_bilinearized(const FrozenOperators& ops, const Trajectory& phi,
                              const Trajectory& psi);
Trajectory solve_bilinearized(const Discretization& disc, const PotentialPair& pots,
                              const Trajectory& base, const Trajectory& phi,
                              const Trajectory& psi, const SolverOptions& opts = {});

/// Backward recursion that is the exact transpose of the linearized scheme.
/// Entry n_t is the terminal datum; entry j < n_t pairs with control slice j.
AdjointTrajectory solve_adjoint(const FrozenOperators& ops, const Targets& targets,
                                const CostWeights& w);
AdjointTrajectory solve_adjoint(const Discretization& disc, const PotentialPair& pots,
                                const Trajectory& base, const Targets& targets,
                                const CostWeights& w, const SolverOptions& opts = {});

/// The adjoint restricted to the control slices: (p_j, trace p_j).
ControlPair adjoint_to_control(const Discretization& disc, const AdjointTrajectory& p);

struct SeparationEstimate {
  double r_minus = 0.0;
  double r_plus = 0.0;
  /// 1 - max(|r_minus|, |r_plus|).
  double delta_obs() const;
};

SeparationEstimate estimate_separation(const Trajectory& traj);

}  // namespace acsparse
