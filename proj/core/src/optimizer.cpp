#include "acsparse/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acsparse/errors.hpp"

namespace acsparse {

ControlPair prox_control(const Problem& problem, const ControlPair& w, double s) {
  const Discretization& disc = problem.disc();
  const CostWeights& cw = problem.weights();
  const BoxBounds& box = problem.bounds();
  switch (problem.mode()) {
    case SparsityMode::none:
      return box.project(w);
    case SparsityMode::full: {
      ControlPair z = w;
      for (auto& f : z.bulk) f.values = prox_l1_box(f.values, s * cw.alpha, box.rho_min, box.rho_max);
      for (auto& g : z.boundary)
        g.values = prox_l1_box(g.values, s * cw.alpha_gamma, box.rho_gamma_min, box.rho_gamma_max);
      return z;
    }
    case SparsityMode::time_directional: {
      ControlPair z = w;
      const Eigen::VectorXd& mb = disc.bulk_mass();
      const Eigen::VectorXd& mr = disc.mesh().boundary_weights();
      for (auto& f : z.bulk)
        f.values = prox_group_time_box(f.values, mb, s * cw.alpha, box.rho_min, box.rho_max);
      for (auto& g : z.boundary)
        g.values = prox_group_time_box(g.values, mr, s * cw.alpha_gamma, box.rho_gamma_min,
                                       box.rho_gamma_max);
      return z;
    }
  }
  return w;
}

namespace {

struct Point {
  ControlPair u;
  SmoothEvaluation eval;
  double sparse = 0.0;
  double cost() const { return eval.cost + sparse; }
};

Point evaluate(const Problem& problem, ControlPair u) {
  Point pt;
  pt.eval = evaluate_smooth(problem, u);
  const CostWeights& w = problem.weights();
  pt.sparse = eval_sparsity(problem.disc(), u, problem.mode(), w.alpha, w.alpha_gamma);
  pt.u = std::move(u);
  return pt;
}

double residual_at(const Problem& problem, const Point& pt) {
  const ControlPair p = adjoint_to_control(problem.disc(), pt.eval.adjoint);
  const SubgradientPair lam =
      select_subgradient(problem.disc(), pt.u, p, problem.weights(), problem.mode());
  return stationarity_residual(problem.disc(), pt.u, p, lam, problem.weights(), problem.bounds());
}

}  // namespace

OptimizationReport optimize(const Problem& problem, const std::optional<ControlPair>& initial) {
  const Discretization& disc = problem.disc();
  const OptimizerOptions& opt = problem.optimizer();
  const CostWeights& w = problem.weights();
  const double s0 =
      opt.initial_step > 0.0 ? opt.initial_step : 1.0 / std::max(w.nu, w.nu_gamma);

  ControlPair u0 = initial ? *initial : ControlPair::zeros(disc.mesh(), disc.grid());
  disc.check_control(u0);
  Point cur = evaluate(problem, problem.bounds().project(std::move(u0)));
  double res = residual_at(problem, cur);

  OptimizationReport rep;
  rep.history.push_back({0, cur.cost(), cur.eval.cost, cur.sparse, res, 0.0});
  double s = s0;
  int it = 0;
  while (res > opt.opt_tol && it < opt.max_iters) {
    s = std::min(s0, 2.0 * s);
    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      ControlPair trial_u = cur.u;
      trial_u.axpy(-s, cur.eval.gradient);
      trial_u = prox_control(problem, trial_u, s);
      ControlPair d = trial_u - cur.u;
      const double dnorm2 = disc.inner(d, d);
      if (dnorm2 == 0.0) {
        // Exact prox fixed point: nothing left to decrease.
        stalled = true;
        break;
      }
      Point trial = evaluate(problem, std::move(trial_u));
      if (trial.cost() <= cur.cost() - opt.sufficient_decrease / s * dnorm2) {
        cur = std::move(trial);
        accepted = true;
      } else {
        s *= opt.backtrack;
        if (s < 1e-14 * s0)
          throw NonmonotoneDecrease("line search failed to find a decreasing step");
      }
    }
    if (stalled) break;
    ++it;
    res = residual_at(problem, cur);
    const IterationRecord& last = rep.history.back();
    if (cur.cost() > last.cost)
      throw NonmonotoneDecrease("accepted step increased the objective");
    rep.history.push_back({it, cur.cost(), cur.eval.cost, cur.sparse, res, s});
  }

  rep.iterations = it;
  rep.residual = res;
  rep.converged = res <= opt.opt_tol;
  rep.cost = cur.cost();
  const ControlPair p = adjoint_to_control(disc, cur.eval.adjoint);
  rep.subgradient = select_subgradient(disc, cur.u, p, w, problem.mode());
  if (problem.mode() != SparsityMode::none)
    rep.sparsity = audit_sparsity_pattern(disc, cur.u, p, w.alpha, w.alpha_gamma, problem.mode());
  else
    rep.sparsity = audit_sparsity_pattern(disc, cur.u, p, 0.0, 0.0, SparsityMode::full);
  rep.control = std::move(cur.u);
  rep.state = std::move(cur.eval.state);
  rep.adjoint = std::move(cur.eval.adjoint);
  return rep;
}

FirstOrderCheck verify_first_order(const Problem& problem, const ControlPair& u,
                                   const AdjointTrajectory& adjoint) {
  const Discretization& disc = problem.disc();
  const CostWeights& w = problem.weights();
  const BoxBounds& box = problem.bounds();
  const ControlPair p = adjoint_to_control(disc, adjoint);
  FirstOrderCheck out;
  out.lambda = select_subgradient(disc, u, p, w, problem.mode());
  out.residual = stationarity_residual(disc, u, p, out.lambda, w, box);
  double vi = std::numeric_limits<double>::infinity();
  auto scan = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp, const Eigen::VectorXd& ll,
                  double alpha, double nu, double lo, double hi) {
    for (Eigen::Index i = 0; i < uu.size(); ++i) {
      const double g = pp[i] + alpha * ll[i] + nu * uu[i];
      double slack;
      if (lo < hi && uu[i] <= lo) slack = g;
      else if (lo < hi && uu[i] >= hi) slack = -g;
      else if (lo == hi) slack = 0.0;
      else slack = -std::abs(g);
      vi = std::min(vi, slack);
    }
  };
  const bool sparse = problem.mode() != SparsityMode::none;
  for (int j = 0; j < u.slices(); ++j) {
    scan(u.bulk[j].values, p.bulk[j].values, out.lambda.bulk[j].values, sparse ? w.alpha : 0.0,
         w.nu, box.rho_min, box.rho_max);
    scan(u.boundary[j].values, p.boundary[j].values, out.lambda.boundary[j].values,
         sparse ? w.alpha_gamma : 0.0, w.nu_gamma, box.rho_gamma_min, box.rho_gamma_max);
  }
  out.vi_min = vi;
  return out;
}

FirstOrderCheck verify_first_order(const Problem& problem, const ControlPair& u) {
  if (!problem.bounds().contains(u))
    throw InvalidArgument("first-order check needs a control inside the box");
  SmoothEvaluation ev = evaluate_smooth(problem, u);
  return verify_first_order(problem, u, ev.adjoint);
}

}  // namespace acsparse
