#include "acsparse/soc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "acsparse/errors.hpp"
#include "acsparse/sparsity.hpp"

namespace acsparse {

ConeSpec make_cone(const Problem& problem, const ControlPair& u, const AdjointTrajectory& adjoint,
                   bool simple) {
  const CostWeights& w = problem.weights();
  const bool sparse = problem.mode() != SparsityMode::none;
  ConeSpec cone;
  cone.u = u;
  cone.p = adjoint_to_control(problem.disc(), adjoint);
  cone.alpha = sparse ? w.alpha : 0.0;
  cone.alpha_gamma = sparse ? w.alpha_gamma : 0.0;
  cone.nu = w.nu;
  cone.nu_gamma = w.nu_gamma;
  cone.bounds = problem.bounds();
  cone.tol_act = 1e-4 * std::max({cone.alpha, w.nu * u.max_abs(), 1.0});
  cone.simple = simple;
  if (simple) cone.lambda = select_subgradient(problem.disc(), u, cone.p, w, problem.mode());
  return cone;
}

namespace {

struct NodeRule {
  double alpha;
  double nu;
  double lo;
  double hi;
  double tol;
  bool simple;
};

double project_node(double v, double u, double p, double lambda, const NodeRule& r) {
  const bool at_lo = std::abs(u - r.lo) <= r.tol;
  const bool at_hi = std::abs(u - r.hi) <= r.tol;
  bool lower = at_lo;
  bool upper = at_hi;
  if (r.simple) {
    if (std::abs(p + r.alpha * lambda + r.nu * u) > r.tol) return 0.0;
  } else {
    if (std::abs(std::abs(p + r.nu * u) - r.alpha) > r.tol) return 0.0;
    // The kink of |u| at zero only exists when the L1 term is present.
    const bool zero = r.alpha > 0.0 && std::abs(u) <= r.tol;
    lower = lower || (zero && std::abs(p + r.alpha) <= r.tol);
    upper = upper || (zero && std::abs(p - r.alpha) <= r.tol);
  }
  if (lower) v = std::max(v, 0.0);
  if (upper) v = std::min(v, 0.0);
  return v;
}

}  // namespace

ControlPair project_to_critical_cone(const ControlPair& v, const ConeSpec& cone) {
  if (v.slices() != cone.u.slices() || v.slices() != cone.p.slices())
    throw ShapeMismatch("cone projection: slice counts differ");
  const NodeRule rb{cone.alpha, cone.nu, cone.bounds.rho_min, cone.bounds.rho_max, cone.tol_act,
                    cone.simple};
  const NodeRule rr{cone.alpha_gamma, cone.nu_gamma, cone.bounds.rho_gamma_min,
                    cone.bounds.rho_gamma_max, cone.tol_act, cone.simple};
  if (cone.simple && !cone.lambda) throw InvalidArgument("simple cone needs a subgradient");
  ControlPair out = v;
  for (int j = 0; j < v.slices(); ++j) {
    auto& b = out.bulk[j].values;
    auto& g = out.boundary[j].values;
    if (b.size() != cone.u.bulk[j].values.size() || g.size() != cone.u.boundary[j].values.size())
      throw ShapeMismatch("cone projection: field sizes differ");
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double lam = cone.simple ? cone.lambda->bulk[j].values[i] : 0.0;
      b[i] = project_node(b[i], cone.u.bulk[j].values[i], cone.p.bulk[j].values[i], lam, rb);
    }
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double lam = cone.simple ? cone.lambda->boundary[j].values[i] : 0.0;
      g[i] = project_node(g[i], cone.u.boundary[j].values[i], cone.p.boundary[j].values[i], lam,
                          rr);
    }
  }
  return out;
}

SocReport sample_coercivity(const Problem& problem, const ControlPair& u_star,
                            const CoercivityOptions& opts) {
  if (opts.n_samples < 1) throw InvalidArgument("coercivity sampling needs at least one sample");
  const Discretization& disc = problem.disc();
  const SmoothEvaluation at = evaluate_smooth(problem, u_star);
  const FrozenOperators ops(disc, problem.potentials(), at.state, problem.solver());
  const ConeSpec cone = make_cone(problem, u_star, at.adjoint, opts.simple_cone);

  std::mt19937_64 rng(opts.seed);
  SocReport rep;
  rep.requested = opts.n_samples;
  rep.min_rayleigh = std::numeric_limits<double>::infinity();
  rep.max_rayleigh = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < opts.n_samples; ++s) {
    const ControlPair raw = random_control(disc.mesh(), disc.grid(), rng);
    ControlPair v = project_to_critical_cone(raw, cone);
    const double n = disc.norm(v);
    if (n <= 1e-12 * disc.norm(raw)) continue;
    v *= 1.0 / n;
    CoercivitySample cs;
    cs.rayleigh = quadratic_form_D2J(problem, ops, at.adjoint, v, v);
    if (opts.oracle_step > 0.0) {
      const double t = opts.oracle_step;
      const double jp = smooth_cost(problem, u_star + t * v);
      const double jm = smooth_cost(problem, u_star - t * v);
      cs.oracle = (jp - 2.0 * at.cost + jm) / (t * t);
      cs.oracle_rel_error =
          std::abs(cs.rayleigh - *cs.oracle) / std::max(std::abs(*cs.oracle), 1e-300);
    }
    rep.min_rayleigh = std::min(rep.min_rayleigh, cs.rayleigh);
    rep.max_rayleigh = std::max(rep.max_rayleigh, cs.rayleigh);
    rep.samples.push_back(cs);
  }
  rep.kept = static_cast<int>(rep.samples.size());
  if (rep.kept == 0) {
    rep.all_projections_zero = true;
    rep.min_rayleigh = 0.0;
    rep.max_rayleigh = 0.0;
    rep.label = "all projections zero: cone numerically trivial";
    return rep;
  }
  const int bins = std::max(1, opts.histogram_bins);
  const double lo = rep.min_rayleigh;
  const double width = (rep.max_rayleigh - lo) / bins;
  for (int b = 0; b <= bins; ++b) rep.histogram_edges.push_back(lo + b * width);
  rep.histogram_counts.assign(bins, 0);
  for (const auto& cs : rep.samples) {
    int b = width > 0.0 ? static_cast<int>((cs.rayleigh - lo) / width) : 0;
    rep.histogram_counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  rep.label = rep.min_rayleigh > 0.0
                  ? "positive on all sampled cone directions (evidence, not proof)"
                  : "nonpositive sampled value: coercivity fails at this tolerance";
  return rep;
}

GrowthReport quadratic_growth_probe(const Problem& problem, const ControlPair& u_star,
                                    const std::vector<double>& radii, int n_dirs,
                                    std::uint64_t seed) {
  const Discretization& disc = problem.disc();
  const double f_star = total_cost(problem, u_star);
  std::mt19937_64 rng(seed);
  struct Sample {
    double gap;
    double dist2;
  };
  std::vector<std::vector<Sample>> table;
  GrowthReport rep;
  double sigma = std::numeric_limits<double>::infinity();
  for (double r : radii) {
    GrowthRow row;
    row.radius = r;
    row.min_ratio = std::numeric_limits<double>::infinity();
    std::vector<Sample> samples;
    for (int k = 0; k < n_dirs; ++k) {
      ControlPair d = random_control(disc.mesh(), disc.grid(), rng);
      d *= 1.0 / disc.norm(d);
      const ControlPair u = problem.bounds().project(u_star + r * d);
      const ControlPair diff = u - u_star;
      const double dist2 = disc.inner(diff, diff);
      if (dist2 == 0.0) continue;
      const double gap = total_cost(problem, u) - f_star;
      samples.push_back({gap, dist2});
      row.min_ratio = std::min(row.min_ratio, gap / dist2);
    }
    if (samples.empty()) row.min_ratio = 0.0;
    sigma = std::min(sigma, row.min_ratio);
    rep.rows.push_back(row);
    table.push_back(std::move(samples));
  }
  rep.sigma = std::isfinite(sigma) ? sigma : 0.0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& s : table[i]) worst = std::min(worst, s.gap - rep.sigma * s.dist2);
    rep.rows[i].worst_slack = std::isfinite(worst) ? worst : 0.0;
  }
  return rep;
}

TaylorReport taylor_test_DS(const Problem& problem, const ControlPair& u, const ControlPair& h,
                            const std::vector<double>& steps) {
  const Discretization& disc = problem.disc();
  const PotentialPair& pots = problem.potentials();
  const Trajectory y = solve_state(disc, pots, problem.y0(), u, problem.solver());
  const FrozenOperators ops(disc, pots, y, problem.solver());
  const Trajectory xi = solve_linearized(ops, h);
  const Trajectory eta = solve_bilinearized(ops, xi, xi);
  TaylorReport rep;
  rep.steps = steps;
  for (double t : steps) {
    const Trajectory yt = solve_state(disc, pots, problem.y0(), u + t * h, problem.solver());
    Trajectory r1 = yt;
    Trajectory r2 = yt;
    for (std::size_t n = 0; n < yt.states.size(); ++n) {
      r1.states[n].values() -= y.states[n].values() + t * xi.states[n].values();
      r2.states[n].values() = r1.states[n].values() - 0.5 * t * t * eta.states[n].values();
    }
    rep.first_remainder.push_back(disc.norm(r1));
    rep.second_remainder.push_back(disc.norm(r2));
  }
  rep.first_slope = loglog_slope(steps, rep.first_remainder);
  rep.second_slope = loglog_slope(steps, rep.second_remainder);
  return rep;
}

ContinuityReport continuity_test_appendix(const Problem& problem, const ControlPair& u_star,
                                          const std::vector<double>& scales, std::uint64_t seed) {
  const Discretization& disc = problem.disc();
  std::mt19937_64 rng(seed);
  ControlPair d = random_control(disc.mesh(), disc.grid(), rng);
  d *= 1.0 / disc.norm(d);
  ControlPair v = random_control(disc.mesh(), disc.grid(), rng);
  v *= 1.0 / disc.norm(v);

  const SmoothEvaluation star = evaluate_smooth(problem, u_star);
  const double d1_star = disc.inner(star.gradient, v);
  const double d2_star = quadratic_form_D2J(problem, star, v, v);

  ContinuityReport rep;
  for (double s : scales) {
    const SmoothEvaluation ev = evaluate_smooth(problem, u_star + s * d);
    Trajectory diff;
    for (std::size_t n = 0; n < ev.adjoint.states.size(); ++n) {
      diff.states.emplace_back(
          BulkField{ev.adjoint.states[n].values() - star.adjoint.states[n].values()});
    }
    ContinuityRow row;
    row.scale = s;
    row.adjoint_diff = disc.norm(diff);
    row.first_derivative_diff = std::abs(disc.inner(ev.gradient, v) - d1_star);
    row.second_derivative_diff = std::abs(quadratic_form_D2J(problem, ev, v, v) - d2_star);
    rep.rows.push_back(row);
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : rep.rows) {
    xs.push_back(r.scale);
    ys.push_back(r.adjoint_diff);
  }
  rep.adjoint_rate = loglog_slope(xs, ys);
  auto monotone = [&](auto field) {
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      if (field(rep.rows[i]) > field(rep.rows[i - 1])) return false;
    return true;
  };
  rep.adjoint_monotone = monotone([](const ContinuityRow& r) { return r.adjoint_diff; });
  rep.first_monotone = monotone([](const ContinuityRow& r) { return r.first_derivative_diff; });
  rep.second_monotone = monotone([](const ContinuityRow& r) { return r.second_derivative_diff; });
  return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

}  // namespace acsparse
