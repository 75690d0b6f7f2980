#include "acsparse/pde_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "acsparse/errors.hpp"

namespace acsparse {

Eigen::VectorXd reaction(const Discretization& disc, const PotentialPair& pots,
                         const Eigen::VectorXd& y, int order) {
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const Eigen::VectorXd& ms = disc.surface_mass();
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double v = mb[i] * eval_derivative(pots.bulk, order, y[i]);
    if (ms[i] != 0.0) v += ms[i] * eval_derivative(pots.surface, order, y[i]);
    out[i] = v;
  }
  return out;
}

namespace {

Eigen::VectorXd residual_vector(const Discretization& disc, const PotentialPair& pots,
                                const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                const Eigen::VectorXd& forcing) {
  const double inv_dt = 1.0 / disc.grid().dt();
  Eigen::VectorXd r = disc.total_mass().cwiseProduct(next - prev) * inv_dt;
  r += disc.stiffness() * next;
  r += reaction(disc, pots, next, 1);
  r -= forcing;
  return r;
}

double scaled_norm(const Discretization& disc, const Eigen::VectorXd& r) {
  return r.cwiseQuotient(disc.total_mass()).cwiseAbs().maxCoeff();
}

bool inside_guard(const Eigen::VectorXd& y, double guard) {
  const double lim = 1.0 - guard;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(std::abs(y[i]) <= lim)) return false;
  }
  return true;
}

}  // namespace

Eigen::VectorXd step_residual(const Discretization& disc, const PotentialPair& pots,
                              const CoupledField& prev, const CoupledField& next,
                              const ControlPair& u, int slice) {
  disc.check_control(u);
  return residual_vector(disc, pots, prev.values(), next.values(), disc.forcing(u, slice));
}

double weak_form_residual(const Discretization& disc, const PotentialPair& pots,
                          const Trajectory& traj, const ControlPair& u, int step,
                          const CoupledField& test) {
  disc.check_trajectory(traj);
  if (step < 1 || step > disc.grid().n_t()) throw InvalidArgument("step index out of range");
  check_conforms(test.bulk(), disc.mesh());
  return test.values().dot(
      step_residual(disc, pots, traj.states[step - 1], traj.states[step], u, step - 1));
}

double max_weak_form_residual(const Discretization& disc, const PotentialPair& pots,
                              const Trajectory& traj, const ControlPair& u) {
  disc.check_trajectory(traj);
  double worst = 0.0;
  for (int k = 1; k <= disc.grid().n_t(); ++k) {
    Eigen::VectorXd r = step_residual(disc, pots, traj.states[k - 1], traj.states[k], u, k - 1);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

Trajectory solve_state(const Discretization& disc, const PotentialPair& pots,
                       const CoupledField& y0, const ControlPair& u, const SolverOptions& opts,
                       SolveStats* stats) {
  pots.validate();
  disc.check_control(u);
  if (!u.all_finite()) throw InvalidArgument("control is not finite");
  check_conforms(y0.bulk(), disc.mesh());
  if (!y0.values().allFinite() || y0.values().cwiseAbs().maxCoeff() >= 1.0)
    throw InvalidInitial("A2: initial datum must lie strictly inside (-1, 1)");
  const bool guarded = pots.any_singular();
  if (guarded && !inside_guard(y0.values(), opts.newton_guard))
    throw InvalidInitial("A2: initial datum lies within the Newton guard of +-1");

  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  CoupledKernel kernel(disc, opts.lin_tol);
  const double eps = std::numeric_limits<double>::epsilon();

  Trajectory traj;
  traj.states.reserve(disc.grid().n_t() + 1);
  traj.states.push_back(y0);
  for (int k = 1; k <= disc.grid().n_t(); ++k) {
    const Eigen::VectorXd& prev = traj.states[k - 1].values();
    const Eigen::VectorXd b = disc.forcing(u, k - 1);
    Eigen::VectorXd y = prev;
    Eigen::VectorXd g = residual_vector(disc, pots, prev, y, b);
    double res = scaled_norm(disc, g);
    bool converged = res <= opts.newton_tol;
    for (int it = 0; !converged && it < opts.max_newton_iterations; ++it) {
      ++st.newton_iterations;
      kernel.factorize(reaction(disc, pots, y, 2));
      const Eigen::VectorXd dy = kernel.solve(-g);
      const double ynorm = std::max(1.0, y.cwiseAbs().maxCoeff());
      const double dnorm = dy.cwiseAbs().maxCoeff();
      if (dnorm <= 4.0 * eps * ynorm) {
        converged = true;
        break;
      }
      double lambda = 1.0;
      int guard_hits = 0;
      int tries = 0;
      bool accepted = false;
      for (; tries <= opts.max_halvings; ++tries, lambda *= 0.5) {
        Eigen::VectorXd trial = y + lambda * dy;
        if (guarded && !inside_guard(trial, opts.newton_guard)) {
          ++st.guard_rejections;
          ++guard_hits;
          continue;
        }
        Eigen::VectorXd gt = residual_vector(disc, pots, prev, trial, b);
        const double rt = scaled_norm(disc, gt);
        if (rt < res || rt <= opts.newton_tol) {
          y = std::move(trial);
          g = std::move(gt);
          res = rt;
          accepted = true;
          break;
        }
        // At the rounding floor a full tiny step is as good as the current point.
        if (lambda == 1.0 && dnorm <= 1e-9 * ynorm) {
          y = std::move(trial);
          g = std::move(gt);
          res = rt;
          accepted = true;
          converged = true;
          break;
        }
        ++st.residual_halvings;
      }
      if (!accepted) {
        // The guard blocked the Newton path: the solution leaves the interval.
        if (guard_hits > 0)
          throw SeparationViolation("Newton iterate forced outside the guarded interval at step " +
                                    std::to_string(k));
        throw NewtonDivergence("Newton residual not reduced after damping at step " +
                               std::to_string(k));
      }
      if (res <= opts.newton_tol) converged = true;
    }
    if (!converged)
      throw NewtonDivergence("Newton did not converge at step " + std::to_string(k) +
                             " (residual " + std::to_string(res) + ")");
    st.max_residual = std::max(st.max_residual, res);
    traj.states.emplace_back(BulkField{std::move(y)});
  }
  return traj;
}

FrozenOperators::FrozenOperators(const Discretization& disc, const PotentialPair& pots,
                                 const Trajectory& base, const SolverOptions& opts)
    : disc_(&disc), base_(&base) {
  disc.check_trajectory(base);
  const int n_t = disc.grid().n_t();
  kernels_.resize(n_t + 1);
  third_.resize(n_t + 1);
  for (int k = 1; k <= n_t; ++k) {
    const Eigen::VectorXd& y = base.states[k].values();
    kernels_[k] = std::make_unique<CoupledKernel>(disc, opts.lin_tol);
    kernels_[k]->factorize(reaction(disc, pots, y, 2));
    third_[k] = reaction(disc, pots, y, 3);
  }
}

Eigen::VectorXd FrozenOperators::solve(int k, const Eigen::VectorXd& rhs) const {
  return kernels_.at(k)->solve(rhs);
}

Trajectory solve_linearized(const FrozenOperators& ops, const ControlPair& h) {
  const Discretization& disc = ops.disc();
  disc.check_control(h);
  const double inv_dt = 1.0 / disc.grid().dt();
  Trajectory xi;
  xi.states.push_back(CoupledField::zeros(disc.mesh()));
  for (int k = 1; k <= disc.grid().n_t(); ++k) {
    Eigen::VectorXd rhs =
        disc.total_mass().cwiseProduct(xi.states[k - 1].values()) * inv_dt + disc.forcing(h, k - 1);
    xi.states.emplace_back(BulkField{ops.solve(k, rhs)});
  }
  return xi;
}

Trajectory solve_linearized(const Discretization& disc, const PotentialPair& pots,
                            const Trajectory& base, const ControlPair& h,
                            const SolverOptions& opts) {
  FrozenOperators ops(disc, pots, base, opts);
  return solve_linearized(ops, h);
}

Trajectory solve_bilinearized(const FrozenOperators& ops, const Trajectory& phi,
                              const Trajectory& psi) {
  const Discretization& disc = ops.disc();
  disc.check_trajectory(phi);
  disc.check_trajectory(psi);
  const double inv_dt = 1.0 / disc.grid().dt();
  Trajectory eta;
  eta.states.push_back(CoupledField::zeros(disc.mesh()));
  for (int k = 1; k <= disc.grid().n_t(); ++k) {
    Eigen::VectorXd rhs = disc.total_mass().cwiseProduct(eta.states[k - 1].values()) * inv_dt;
    rhs -= (ops.third(k).array() * phi.states[k].values().array() * psi.states[k].values().array())
               .matrix();
    eta.states.emplace_back(BulkField{ops.solve(k, rhs)});
  }
  return eta;
}

Trajectory solve_bilinearized(const Discretization& disc, const PotentialPair& pots,
                              const Trajectory& base, const Trajectory& phi,
                              const Trajectory& psi, const SolverOptions& opts) {
  FrozenOperators ops(disc, pots, base, opts);
  return solve_bilinearized(ops, phi, psi);
}

AdjointTrajectory solve_adjoint(const FrozenOperators& ops, const Targets& targets,
                                const CostWeights& w) {
  const Discretization& disc = ops.disc();
  const Mesh& mesh = disc.mesh();
  const TimeGrid& grid = disc.grid();
  const Trajectory& base = ops.base();
  targets.check(mesh, grid);
  const int n_t = grid.n_t();
  const Eigen::VectorXd& mb = disc.bulk_mass();
  const Eigen::VectorXd& ms = disc.surface_mass();

  auto tracking_source = [&](int n) {
    const CoupledField& y = base.states[n];
    Eigen::VectorXd s = w.beta1 * mb.cwiseProduct(y.values() - targets.y_q[n].values);
    BoundaryField diff = y.boundary(mesh);
    diff.values -= targets.y_sigma[n].values;
    s += w.beta2 * ms.cwiseProduct(embed_boundary(diff, mesh));
    return Eigen::VectorXd(grid.node_weight(n) * s);
  };

  AdjointTrajectory p;
  p.states.resize(n_t + 1);
  {
    const CoupledField& yT = base.states[n_t];
    Eigen::VectorXd terminal = w.beta3 * mb.cwiseProduct(yT.values() - targets.y_omega_T.values);
    BoundaryField diff = yT.boundary(mesh);
    diff.values -= targets.y_gamma_T.values;
    terminal += w.beta4 * ms.cwiseProduct(embed_boundary(diff, mesh));
    p.states[n_t] = CoupledField(BulkField{terminal.cwiseQuotient(disc.total_mass())});
  }
  const double inv_dt = 1.0 / grid.dt();
  for (int j = n_t - 1; j >= 0; --j) {
    Eigen::VectorXd rhs =
        (disc.total_mass().cwiseProduct(p.states[j + 1].values()) + tracking_source(j + 1)) *
        inv_dt;
    p.states[j] = CoupledField(BulkField{ops.solve(j + 1, rhs)});
  }
  return p;
}

AdjointTrajectory solve_adjoint(const Discretization& disc, const PotentialPair& pots,
                                const Trajectory& base, const Targets& targets,
                                const CostWeights& w, const SolverOptions& opts) {
  FrozenOperators ops(disc, pots, base, opts);
  return solve_adjoint(ops, targets, w);
}

ControlPair adjoint_to_control(const Discretization& disc, const AdjointTrajectory& p) {
  if (static_cast<int>(p.states.size()) != disc.grid().n_t() + 1)
    throw ShapeMismatch("adjoint trajectory must have n_t + 1 entries");
  ControlPair c;
  for (int j = 0; j < disc.grid().n_t(); ++j) {
    c.bulk.push_back(p.states[j].bulk());
    c.boundary.push_back(p.states[j].boundary(disc.mesh()));
  }
  return c;
}

double SeparationEstimate::delta_obs() const {
  return 1.0 - std::max(std::abs(r_minus), std::abs(r_plus));
}

SeparationEstimate estimate_separation(const Trajectory& traj) {
  SeparationEstimate e{std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
  for (const auto& s : traj.states) {
    e.r_minus = std::min(e.r_minus, s.values().minCoeff());
    e.r_plus = std::max(e.r_plus, s.values().maxCoeff());
  }
  if (traj.states.empty()) e = {};
  return e;
}

}  // namespace acsparse
