#include "acsparse/problem.hpp"

#include <cmath>

#include "acsparse/errors.hpp"

namespace acsparse {

ProblemSpec::ProblemSpec(Mesh mesh_in, TimeGrid grid_in)
    : mesh(std::move(mesh_in)),
      grid(grid_in),
      y0(BulkField::zeros(mesh)),
      targets(Targets::zeros(mesh, grid)) {}

namespace {

void validate_structure(const ProblemSpec& s) {
  s.potentials.validate();
  s.bounds.validate();
  s.targets.check(s.mesh, s.grid);
  check_conforms(s.y0, s.mesh);
  const CostWeights& w = s.weights;
  for (double b : {w.beta1, w.beta2, w.beta3, w.beta4, w.alpha, w.alpha_gamma}) {
    if (!std::isfinite(b) || b < 0.0)
      throw AssumptionViolation("A4: weights beta and alpha must be finite and nonnegative");
  }
  if (!(w.nu > 0.0) || !(w.nu_gamma > 0.0) || !std::isfinite(w.nu) || !std::isfinite(w.nu_gamma))
    throw AssumptionViolation("A4: nu and nu_gamma must be positive");
  if (!s.y0.values.allFinite() || s.y0.values.cwiseAbs().maxCoeff() >= 1.0)
    throw InvalidInitial("A2: initial datum must lie strictly inside (-1, 1)");
  if (s.potentials.any_singular() &&
      s.y0.values.cwiseAbs().maxCoeff() > 1.0 - s.solver.newton_guard)
    throw InvalidInitial("A2: initial datum lies within the Newton guard of +-1");
  const OptimizerOptions& o = s.optimizer;
  if (!(o.backtrack > 0.0 && o.backtrack < 1.0))
    throw InvalidArgument("optimizer backtrack factor must lie in (0, 1)");
  if (!(o.opt_tol > 0.0) || o.max_iters < 1 || o.initial_step < 0.0)
    throw InvalidArgument("optimizer tolerances must be positive");
  if (!(s.solver.newton_tol > 0.0) || !(s.solver.newton_guard > 0.0) ||
      s.solver.newton_guard >= 0.5)
    throw InvalidArgument("solver tolerances out of range");
}

}  // namespace

std::vector<std::string> assumption_violations(const ProblemSpec& s) {
  std::vector<std::string> out;
  const CostWeights& w = s.weights;
  if (w.beta1 == 0.0 && w.beta2 == 0.0 && w.beta3 == 0.0 && w.beta4 == 0.0)
    out.emplace_back("A4: beta1..beta4 are all zero");
  if (w.beta3 != w.beta4) out.emplace_back("A6: beta3 != beta4");
  if (w.beta3 > 0.0) {
    BoundaryField tr = trace(s.targets.y_omega_T, s.mesh);
    if ((tr.values - s.targets.y_gamma_T.values).cwiseAbs().maxCoeff() > 1e-12)
      out.emplace_back("A5: terminal targets are not trace compatible");
  }
  if (s.mode != SparsityMode::none) {
    if (!(w.alpha > 0.0) || !(w.alpha_gamma > 0.0))
      out.emplace_back("sparsity: alpha and alpha_gamma must be positive");
    if (!s.bounds.contains_zero_strictly())
      out.emplace_back("sparsity: box bounds must satisfy rho_min < 0 < rho_max on Q and Sigma");
  }
  return out;
}

Problem::Problem(ProblemSpec spec, Validation level)
    : spec_(std::move(spec)),
      disc_(spec_.mesh, spec_.grid),
      y0_(spec_.y0),
      level_(level) {
  validate_structure(spec_);
  if (level == Validation::assumptions) {
    auto v = assumption_violations(spec_);
    if (!v.empty()) throw AssumptionViolation(v.front());
  }
}

Problem Problem::with_weights(const CostWeights& w) const {
  ProblemSpec s = spec_;
  s.weights = w;
  return Problem(std::move(s), level_);
}

Problem Problem::with_mode(SparsityMode mode) const {
  ProblemSpec s = spec_;
  s.mode = mode;
  return Problem(std::move(s), level_);
}

}  // namespace acsparse
