#pragma once

#include <optional>
#include <vector>

#include "acsparse/objective.hpp"
#include "acsparse/problem.hpp"
#include "acsparse/sparsity.hpp"

namespace acsparse {

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double smooth = 0.0;
  double sparse = 0.0;
  double residual = 0.0;
  /// Step accepted to reach this iterate (0 for the start point).
  double step = 0.0;
};

struct OptimizationReport {
  std::vector<IterationRecord> history;
  ControlPair control;
  Trajectory state;
  AdjointTrajectory adjoint;
  SubgradientPair subgradient;
  SparsityReport sparsity;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double cost = 0.0;
};

/// Prox step for the sparsity term plus box indicator with step s.
ControlPair prox_control(const Problem& problem, const ControlPair& w, double s);

/// Proximal gradient on J_hat = J_smooth + j over the box, with monotone
/// backtracking. Starts from `initial` (projected onto the box) or u = 0.
OptimizationReport optimize(const Problem& problem,
                            const std::optional<ControlPair>& initial = std::nullopt);

struct FirstOrderCheck {
  double residual = 0.0;
  /// Worst signed slack of g = p + alpha lambda + nu u: -|g| at interior
  /// nodes, g at the lower bound, -g at the upper bound.
  double vi_min = 0.0;
  SubgradientPair lambda;
};

FirstOrderCheck verify_first_order(const Problem& problem, const ControlPair& u);
/// Same, from an already computed adjoint.
FirstOrderCheck verify_first_order(const Problem& problem, const ControlPair& u,
                                   const AdjointTrajectory& adjoint);

}  // namespace acsparse
