#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acsparse/cost.hpp"
#include "acsparse/discretization.hpp"
#include "acsparse/pde_solvers.hpp"
#include "acsparse/potentials.hpp"

namespace acsparse {

struct OptimizerOptions {
  double opt_tol = 1e-6;
  int max_iters = 2000;
  /// Backtracking factor sigma_bt in (0, 1).
  double backtrack = 0.5;
  /// Initial step s0; zero selects 1 / max(nu, nu_gamma).
  double initial_step = 0.0;
  double sufficient_decrease = 1e-4;
};

/// Everything needed to define one optimal control run.
struct ProblemSpec {
  ProblemSpec(Mesh mesh, TimeGrid grid);

  Mesh mesh;
  TimeGrid grid;
  PotentialPair potentials;
  BulkField y0;
  Targets targets;
  CostWeights weights;
  BoxBounds bounds;
  SparsityMode mode = SparsityMode::none;
  SolverOptions solver;
  OptimizerOptions optimizer;
  std::uint64_t seed = 0;
};

enum class Validation {
  /// Shapes, finiteness, box ordering, nu > 0, interior initial datum.
  structural,
  /// structural plus A4 (weights not all zero), A5 (trace-compatible
  /// terminal target), A6 (beta3 = beta4) and, in sparsity modes, positive
  /// alpha with a box containing zero strictly.
  assumptions,
};

/// Names every violated assumption; empty when all of them hold.
std::vector<std::string> assumption_violations(const ProblemSpec& spec);

/// Validated problem with its assembled discretization.
class Problem {
 public:
  explicit Problem(ProblemSpec spec, Validation level = Validation::assumptions);

  const ProblemSpec& spec() const { return spec_; }
  const Discretization& disc() const { return disc_; }
  const Mesh& mesh() const { return disc_.mesh(); }
  const TimeGrid& grid() const { return disc_.grid(); }
  const PotentialPair& potentials() const { return spec_.potentials; }
  const CoupledField& y0() const { return y0_; }
  const Targets& targets() const { return spec_.targets; }
  const CostWeights& weights() const { return spec_.weights; }
  const BoxBounds& bounds() const { return spec_.bounds; }
  SparsityMode mode() const { return spec_.mode; }
  const SolverOptions& solver() const { return spec_.solver; }
  const OptimizerOptions& optimizer() const { return spec_.optimizer; }

  /// Copy with different weights (used by alpha sweeps).
  Problem with_weights(const CostWeights& w) const;
  Problem with_mode(SparsityMode mode) const;

 private:
  ProblemSpec spec_;
  Discretization disc_;
  CoupledField y0_;
  Validation level_;
};

}  // namespace acsparse
