#include "acsparse/objective.hpp"

#include <cmath>

#include "acsparse/errors.hpp"

namespace acsparse {

namespace {

double weighted_sq(const Eigen::VectorXd& d, const Eigen::VectorXd& m) {
  return (d.array().square() * m.array()).sum();
}

double ring_sq(const Discretization& disc, const Eigen::VectorXd& d) {
  return disc.mesh().dx() * d.squaredNorm();
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double eval_tracking(const Discretization& disc, const Trajectory& traj, const ControlPair& u,
                     const Targets& targets, const CostWeights& w) {
  const Mesh& mesh = disc.mesh();
  const TimeGrid& grid = disc.grid();
  disc.check_trajectory(traj);
  disc.check_control(u);
  targets.check(mesh, grid);
  const Eigen::VectorXd& mb = disc.bulk_mass();
  double q = 0.0;
  double sigma = 0.0;
  for (int n = 0; n <= grid.n_t(); ++n) {
    const CoupledField& y = traj.states[n];
    q += grid.node_weight(n) * weighted_sq(y.values() - targets.y_q[n].values, mb);
    sigma += grid.node_weight(n) *
             ring_sq(disc, y.boundary(mesh).values - targets.y_sigma[n].values);
  }
  const CoupledField& yT = traj.states.back();
  const double omega_T = weighted_sq(yT.values() - targets.y_omega_T.values, mb);
  const double gamma_T = ring_sq(disc, yT.boundary(mesh).values - targets.y_gamma_T.values);
  double uq = 0.0;
  double us = 0.0;
  for (int j = 0; j < grid.n_t(); ++j) {
    uq += grid.dt() * weighted_sq(u.bulk[j].values, mb);
    us += grid.dt() * ring_sq(disc, u.boundary[j].values);
  }
  return 0.5 * (w.beta1 * q + w.beta2 * sigma + w.beta3 * omega_T + w.beta4 * gamma_T +
                w.nu * uq + w.nu_gamma * us);
}

double eval_sparsity(const Discretization& disc, const ControlPair& u, SparsityMode mode,
                     double alpha, double alpha_gamma) {
  disc.check_control(u);
  if (mode == SparsityMode::none) return 0.0;
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const double dx = disc.mesh().dx();
  const double dt = disc.grid().dt();
  double bulk = 0.0;
  double ring = 0.0;
  for (int j = 0; j < u.slices(); ++j) {
    if (mode == SparsityMode::full) {
      bulk += (u.bulk[j].values.array().abs() * mb.array()).sum();
      ring += dx * u.boundary[j].values.cwiseAbs().sum();
    } else {
      bulk += std::sqrt(weighted_sq(u.bulk[j].values, mb));
      ring += std::sqrt(ring_sq(disc, u.boundary[j].values));
    }
  }
  return dt * (alpha * bulk + alpha_gamma * ring);
}

double directional_derivative_sparsity(const Discretization& disc, const ControlPair& u,
                                       const ControlPair& v, SparsityMode mode, double alpha,
                                       double alpha_gamma) {
  disc.check_control(u);
  disc.check_control(v);
  if (mode == SparsityMode::none) return 0.0;
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const double dx = disc.mesh().dx();
  const double dt = disc.grid().dt();
  auto pointwise = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const auto& weight) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      s += weight(i) * (a[i] != 0.0 ? sign(a[i]) * b[i] : std::abs(b[i]));
    return s;
  };
  auto slice = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, const auto& weight) {
    double aa = 0.0;
    double ab = 0.0;
    double bb = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      aa += weight(i) * a[i] * a[i];
      ab += weight(i) * a[i] * b[i];
      bb += weight(i) * b[i] * b[i];
    }
    return aa > 0.0 ? ab / std::sqrt(aa) : std::sqrt(bb);
  };
  auto wb = [&](Eigen::Index i) { return mb[i]; };
  auto wr = [&](Eigen::Index) { return dx; };
  double bulk = 0.0;
  double ring = 0.0;
  for (int j = 0; j < u.slices(); ++j) {
    if (mode == SparsityMode::full) {
      bulk += pointwise(u.bulk[j].values, v.bulk[j].values, wb);
      ring += pointwise(u.boundary[j].values, v.boundary[j].values, wr);
    } else {
      bulk += slice(u.bulk[j].values, v.bulk[j].values, wb);
      ring += slice(u.boundary[j].values, v.boundary[j].values, wr);
    }
  }
  return dt * (alpha * bulk + alpha_gamma * ring);
}

SmoothEvaluation evaluate_smooth(const Problem& problem, const ControlPair& u) {
  const Discretization& disc = problem.disc();
  SmoothEvaluation ev;
  ev.state = solve_state(disc, problem.potentials(), problem.y0(), u, problem.solver(), &ev.stats);
  ev.cost = eval_tracking(disc, ev.state, u, problem.targets(), problem.weights());
  ev.adjoint = solve_adjoint(disc, problem.potentials(), ev.state, problem.targets(),
                             problem.weights(), problem.solver());
  ev.gradient = adjoint_to_control(disc, ev.adjoint);
  const CostWeights& w = problem.weights();
  for (int j = 0; j < u.slices(); ++j) {
    ev.gradient.bulk[j].values += w.nu * u.bulk[j].values;
    ev.gradient.boundary[j].values += w.nu_gamma * u.boundary[j].values;
  }
  return ev;
}

double smooth_cost(const Problem& problem, const ControlPair& u) {
  const Discretization& disc = problem.disc();
  Trajectory y = solve_state(disc, problem.potentials(), problem.y0(), u, problem.solver());
  return eval_tracking(disc, y, u, problem.targets(), problem.weights());
}

double total_cost(const Problem& problem, const ControlPair& u) {
  const CostWeights& w = problem.weights();
  return smooth_cost(problem, u) +
         eval_sparsity(problem.disc(), u, problem.mode(), w.alpha, w.alpha_gamma);
}

ControlPair smooth_gradient(const Problem& problem, const ControlPair& u) {
  return evaluate_smooth(problem, u).gradient;
}

double quadratic_form_D2J(const Problem& problem, const FrozenOperators& ops,
                          const AdjointTrajectory& adjoint, const ControlPair& v,
                          const ControlPair& w) {
  const Discretization& disc = problem.disc();
  const Mesh& mesh = disc.mesh();
  const TimeGrid& grid = disc.grid();
  const CostWeights& cw = problem.weights();
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const double dx = mesh.dx();

  const Trajectory phi = solve_linearized(ops, v);
  const Trajectory psi = (&v == &w) ? phi : solve_linearized(ops, w);

  double value = 0.0;
  for (int n = 1; n <= grid.n_t(); ++n) {
    const Eigen::VectorXd& a = phi.states[n].values();
    const Eigen::VectorXd& b = psi.states[n].values();
    const double q = (a.array() * b.array() * mb.array()).sum();
    const double s = dx * phi.states[n].boundary(mesh).values.dot(psi.states[n].boundary(mesh).values);
    value += grid.node_weight(n) * (cw.beta1 * q + cw.beta2 * s);
    // Curvature of the nonlinearity, weighted by the multiplier of step n.
    value -= grid.dt() * (adjoint.states[n - 1].values().array() * ops.third(n).array() *
                          a.array() * b.array())
                             .sum();
  }
  {
    const Eigen::VectorXd& a = phi.states.back().values();
    const Eigen::VectorXd& b = psi.states.back().values();
    value += cw.beta3 * (a.array() * b.array() * mb.array()).sum();
    value += cw.beta4 * dx *
             phi.states.back().boundary(mesh).values.dot(psi.states.back().boundary(mesh).values);
  }
  for (int j = 0; j < grid.n_t(); ++j) {
    value += grid.dt() * cw.nu * (v.bulk[j].values.array() * w.bulk[j].values.array() * mb.array()).sum();
    value += grid.dt() * cw.nu_gamma * dx * v.boundary[j].values.dot(w.boundary[j].values);
  }
  return value;
}

double quadratic_form_D2J(const Problem& problem, const SmoothEvaluation& at, const ControlPair& v,
                          const ControlPair& w) {
  FrozenOperators ops(problem.disc(), problem.potentials(), at.state, problem.solver());
  return quadratic_form_D2J(problem, ops, at.adjoint, v, w);
}

double quadratic_form_D2J(const Problem& problem, const ControlPair& u, const ControlPair& v,
                          const ControlPair& w) {
  SmoothEvaluation at = evaluate_smooth(problem, u);
  return quadratic_form_D2J(problem, at, v, w);
}

}  // namespace acsparse
