#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "acsparse/errors.hpp"
#include "acsparse/objective.hpp"
#include "acsparse/optimizer.hpp"
#include "acsparse/soc.hpp"
#include "test_problems.hpp"

using namespace acsparse;
using acsparse::testing::log_pair;
using acsparse::testing::rel_err;
using acsparse::testing::small_spec;
using acsparse::testing::uniform_control;

namespace {

Discretization unit_disc(int n_t = 4, double T = 1.0) {
  return Discretization(build_mesh(5, 3, 1.0, 1.0), TimeGrid(T, n_t));
}

ControlPair slice_constant(const Discretization& d, const std::vector<double>& c) {
  ControlPair u = ControlPair::zeros(d.mesh(), d.grid());
  for (int j = 0; j < u.slices(); ++j) u.bulk[j] = BulkField::constant(d.mesh(), c[j]);
  return u;
}

Problem pure_control_problem(PotentialPair pots, double nu, double nu_gamma) {
  ProblemSpec s = small_spec(pots);
  s.weights = CostWeights{0, 0, 0, 0, nu, nu_gamma, 0, 0};
  return Problem(s, Validation::structural);
}

}  // namespace

TEST(Tracking, ZeroAtTargetsAndConstantControlCost) {
  const Discretization d = unit_disc();
  Trajectory y;
  std::mt19937_64 rng(1);
  for (int n = 0; n <= d.grid().n_t(); ++n) {
    const ControlPair r = random_control(d.mesh(), d.grid(), rng);
    y.states.emplace_back(r.bulk[0]);
  }
  const Targets t = Targets::from_trajectory(d.mesh(), y);
  EXPECT_EQ(eval_tracking(d, y, ControlPair::zeros(d.mesh(), d.grid()), t, CostWeights{}), 0.0);

  CostWeights w{0, 0, 0, 0, 1.0, 1.0, 0, 0};
  const ControlPair one = ControlPair::constant(d.mesh(), d.grid(), 1.0, 0.0);
  EXPECT_NEAR(eval_tracking(d, y, one, t, w), d.grid().final_time() * d.mesh().area() / 2, 1e-14);
}

TEST(Tracking, MatchesDenseQuadrature) {
  const Discretization d = unit_disc(5, 0.7);
  const Mesh& m = d.mesh();
  std::mt19937_64 rng(7);
  Trajectory y;
  Targets t = Targets::zeros(m, d.grid());
  for (int n = 0; n <= d.grid().n_t(); ++n) {
    y.states.emplace_back(random_control(m, d.grid(), rng).bulk[0]);
    t.y_q[n] = random_control(m, d.grid(), rng).bulk[1];
    t.y_sigma[n] = random_control(m, d.grid(), rng).boundary[0];
  }
  t.y_omega_T = random_control(m, d.grid(), rng).bulk[2];
  t.y_gamma_T = random_control(m, d.grid(), rng).boundary[3];
  const ControlPair u = random_control(m, d.grid(), rng);
  const CostWeights w{0.3, 1.1, 0.7, 0.4, 0.2, 0.9, 0, 0};
  const int n_t = d.grid().n_t();
  const double dt = d.grid().dt();
  double expected = 0.0;
  for (int n = 0; n <= n_t; ++n) {
    const double tau = (n == 0 || n == n_t) ? dt / 2 : dt;
    for (int row = 0; row < m.rows(); ++row)
      for (int col = 0; col < m.n_x(); ++col) {
        const double cell = m.dx() * m.dy() * (m.is_boundary_row(row) ? 0.5 : 1.0);
        const double e = y.states[n].bulk().at(m, row, col) - t.y_q[n].at(m, row, col);
        expected += 0.5 * w.beta1 * tau * cell * e * e;
      }
    for (int ring = 0; ring < 2; ++ring)
      for (int col = 0; col < m.n_x(); ++col) {
        const double e = y.states[n].bulk().at(m, m.ring_row(ring), col) - t.y_sigma[n].at(m, ring, col);
        expected += 0.5 * w.beta2 * tau * m.dx() * e * e;
      }
  }
  for (int row = 0; row < m.rows(); ++row)
    for (int col = 0; col < m.n_x(); ++col) {
      const double cell = m.dx() * m.dy() * (m.is_boundary_row(row) ? 0.5 : 1.0);
      const double e = y.states[n_t].bulk().at(m, row, col) - t.y_omega_T.at(m, row, col);
      expected += 0.5 * w.beta3 * cell * e * e;
    }
  for (int ring = 0; ring < 2; ++ring)
    for (int col = 0; col < m.n_x(); ++col) {
      const double e = y.states[n_t].bulk().at(m, m.ring_row(ring), col) - t.y_gamma_T.at(m, ring, col);
      expected += 0.5 * w.beta4 * m.dx() * e * e;
    }
  for (int j = 0; j < n_t; ++j) {
    for (int row = 0; row < m.rows(); ++row)
      for (int col = 0; col < m.n_x(); ++col) {
        const double cell = m.dx() * m.dy() * (m.is_boundary_row(row) ? 0.5 : 1.0);
        expected += 0.5 * w.nu * dt * cell * std::pow(u.bulk[j].at(m, row, col), 2);
      }
    for (int i = 0; i < m.boundary_size(); ++i)
      expected += 0.5 * w.nu_gamma * dt * m.dx() * std::pow(u.boundary[j].values[i], 2);
  }
  EXPECT_NEAR(eval_tracking(d, y, u, t, w), expected, 1e-12 * expected);
}

TEST(Sparsity, Examples) {
  const Discretization d = unit_disc(4, 1.0);
  EXPECT_EQ(eval_sparsity(d, ControlPair::zeros(d.mesh(), d.grid()), SparsityMode::full, 1, 1), 0.0);
  EXPECT_EQ(eval_sparsity(d, ControlPair::zeros(d.mesh(), d.grid()), SparsityMode::time_directional, 1, 1),
            0.0);
  const ControlPair one = ControlPair::constant(d.mesh(), d.grid(), 1.0, 0.0);
  EXPECT_NEAR(eval_sparsity(d, one, SparsityMode::full, 2.0, 5.0), 2.0, 1e-14);
  const ControlPair c = slice_constant(d, {-0.3, -0.3, -0.3, -0.3});
  EXPECT_NEAR(eval_sparsity(d, c, SparsityMode::time_directional, 1.5, 0.0), 1.5 * 0.3 * 1.0, 1e-14);
  EXPECT_EQ(eval_sparsity(d, one, SparsityMode::none, 2.0, 2.0), 0.0);
}

TEST(Sparsity, Convexity) {
  const Discretization d = unit_disc();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (SparsityMode mode : {SparsityMode::full, SparsityMode::time_directional})
    for (int trial = 0; trial < 10; ++trial) {
      ControlPair u = random_control(d.mesh(), d.grid(), rng);
      ControlPair v = random_control(d.mesh(), d.grid(), rng);
      if (trial % 3 == 0) u.bulk[1].values.setZero();
      const double th = ud(rng);
      const double lhs = eval_sparsity(d, th * u + (1 - th) * v, mode, 0.7, 0.4);
      const double rhs = th * eval_sparsity(d, u, mode, 0.7, 0.4) +
                         (1 - th) * eval_sparsity(d, v, mode, 0.7, 0.4);
      EXPECT_LE(lhs, rhs + 1e-13);
    }
}

TEST(SparsityDerivative, ClosedForms) {
  const Discretization d = unit_disc();
  std::mt19937_64 rng(2);
  const ControlPair v = random_control(d.mesh(), d.grid(), rng);
  const double alpha = 0.6;
  const double alpha_g = 0.25;
  const ControlPair zero = ControlPair::zeros(d.mesh(), d.grid());
  ControlPair abs_v = v;
  for (auto& f : abs_v.bulk) f.values = f.values.cwiseAbs();
  for (auto& g : abs_v.boundary) g.values = g.values.cwiseAbs();
  EXPECT_NEAR(directional_derivative_sparsity(d, zero, v, SparsityMode::full, alpha, alpha_g),
              eval_sparsity(d, abs_v, SparsityMode::full, alpha, alpha_g), 1e-14);
  const ControlPair pos = ControlPair::constant(d.mesh(), d.grid(), 0.5, 0.2);
  const ControlPair ones = ControlPair::constant(d.mesh(), d.grid(), 1.0, 1.0);
  const double expected = alpha * d.inner(ControlPair::constant(d.mesh(), d.grid(), 1.0, 0.0), v) +
                          alpha_g * d.inner(ControlPair::constant(d.mesh(), d.grid(), 0.0, 1.0), v);
  EXPECT_NEAR(directional_derivative_sparsity(d, pos, v, SparsityMode::full, alpha, alpha_g), expected,
              1e-13);
  (void)ones;
}

TEST(SparsityDerivative, MatchesOneSidedDifferences) {
  const Discretization d = unit_disc();
  std::mt19937_64 rng(21);
  for (SparsityMode mode : {SparsityMode::full, SparsityMode::time_directional})
    for (int trial = 0; trial < 4; ++trial) {
      ControlPair u = random_control(d.mesh(), d.grid(), rng);
      // Zero patches exercise the nonsmooth branch.
      u.bulk[trial % 4].values.head(7).setZero();
      u.boundary[(trial + 1) % 4].values.setZero();
      if (mode == SparsityMode::time_directional) u.bulk[2].values.setZero();
      const ControlPair v = random_control(d.mesh(), d.grid(), rng);
      const double j0 = eval_sparsity(d, u, mode, 0.8, 0.3);
      auto quotient = [&](double tau) { return (eval_sparsity(d, u + tau * v, mode, 0.8, 0.3) - j0) / tau; };
      // Richardson extrapolation of the one-sided quotient.
      const double tau = 1e-6;
      const double extrapolated = 2 * quotient(tau) - quotient(2 * tau);
      const double exact = directional_derivative_sparsity(d, u, v, mode, 0.8, 0.3);
      EXPECT_NEAR(extrapolated, exact, 1e-6 * (1 + std::abs(exact))) << to_string(mode);
    }
}

TEST(SmoothGradient, PureControlCost) {
  const Problem p = pure_control_problem(log_pair(), 0.3, 0.7);
  const ControlPair u = uniform_control(p.mesh(), p.grid(), -1, 1, 3);
  const ControlPair g = smooth_gradient(p, u);
  for (int j = 0; j < u.slices(); ++j) {
    EXPECT_LE((g.bulk[j].values - 0.3 * u.bulk[j].values).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((g.boundary[j].values - 0.7 * u.boundary[j].values).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(SmoothGradient, CentralDifferenceCheck) {
  const Problem p(small_spec());
  const ControlPair u = uniform_control(p.mesh(), p.grid(), -0.5, 0.5, 8);
  const ControlPair g = smooth_gradient(p, u);
  std::mt19937_64 rng(13);
  for (int dir = 0; dir < 4; ++dir) {
    const ControlPair h = random_control(p.mesh(), p.grid(), rng);
    const double exact = p.disc().inner(g, h);
    double best = 1e300;
    for (double t : {1e-3, 1e-4, 1e-5}) {
      const double fd = (smooth_cost(p, u + t * h) - smooth_cost(p, u + (-t) * h)) / (2 * t);
      best = std::min(best, rel_err(fd, exact));
    }
    EXPECT_LE(best, 1e-6) << "direction " << dir;
  }
}

TEST(SmoothGradient, AgreesWithDenseForwardDifferentiation) {
  // Tiny grid: differentiate the discrete cost along every control basis
  // vector by forward sensitivities and compare with the adjoint gradient.
  ProblemSpec s = small_spec(log_pair(), 4, 3, 3, 0.2);
  const Problem p(s);
  const Discretization& d = p.disc();
  const Mesh& m = d.mesh();
  const ControlPair u = uniform_control(m, d.grid(), -0.7, 0.7, 2);
  const SmoothEvaluation ev = evaluate_smooth(p, u);
  const FrozenOperators ops(d, p.potentials(), ev.state);
  const CostWeights& w = p.weights();
  const int n_t = d.grid().n_t();
  auto directional = [&](const ControlPair& e) {
    const Trajectory xi = solve_linearized(ops, e);
    double s = 0.0;
    for (int n = 0; n <= n_t; ++n) {
      const double tau = d.grid().node_weight(n);
      const Eigen::VectorXd ey = ev.state.states[n].values() - p.targets().y_q[n].values;
      s += tau * w.beta1 * (ey.array() * d.bulk_mass().array() * xi.states[n].values().array()).sum();
      const Eigen::VectorXd es = ev.state.states[n].boundary(m).values - p.targets().y_sigma[n].values;
      s += tau * w.beta2 * m.dx() * es.dot(xi.states[n].boundary(m).values);
    }
    const Eigen::VectorXd eT = ev.state.states[n_t].values() - p.targets().y_omega_T.values;
    s += w.beta3 * (eT.array() * d.bulk_mass().array() * xi.states[n_t].values().array()).sum();
    const Eigen::VectorXd gT = ev.state.states[n_t].boundary(m).values - p.targets().y_gamma_T.values;
    s += w.beta4 * m.dx() * gT.dot(xi.states[n_t].boundary(m).values);
    double uq = 0.0;
    for (int j = 0; j < n_t; ++j) {
      uq += d.grid().dt() * w.nu * (u.bulk[j].values.array() * d.bulk_mass().array() * e.bulk[j].values.array()).sum();
      uq += d.grid().dt() * w.nu_gamma * m.dx() * u.boundary[j].values.dot(e.boundary[j].values);
    }
    return s + uq;
  };
  double worst = 0.0;
  for (int j = 0; j < n_t; ++j) {
    for (int i = 0; i < m.bulk_size(); ++i) {
      ControlPair e = ControlPair::zeros(m, d.grid());
      e.bulk[j].values[i] = 1.0;
      const double a = d.inner(ev.gradient, e);
      worst = std::max(worst, std::abs(a - directional(e)) / std::max(std::abs(a), 1e-12));
    }
    for (int i = 0; i < m.boundary_size(); ++i) {
      ControlPair e = ControlPair::zeros(m, d.grid());
      e.boundary[j].values[i] = 1.0;
      const double a = d.inner(ev.gradient, e);
      worst = std::max(worst, std::abs(a - directional(e)) / std::max(std::abs(a), 1e-12));
    }
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(SmoothGradient, VanishesAtUnconstrainedStationaryPoint) {
  ProblemSpec s = small_spec();
  s.bounds = BoxBounds{-50, 50, -50, 50};
  s.optimizer.opt_tol = 1e-6;
  const Problem p(s);
  const OptimizationReport r = optimize(p);
  ASSERT_TRUE(r.converged) << r.iterations << " " << r.residual;
  EXPECT_LT(r.control.max_abs(), 40.0);
  EXPECT_LE(smooth_gradient(p, r.control).max_abs(), s.weights.nu * 1e-6 + 1e-12);
}

TEST(SecondDerivative, PureControlQuadraticPotential) {
  const Problem p = pure_control_problem(acsparse::testing::kind_pair(PotentialKind::regular_as_printed), 0.4, 1.3);
  std::mt19937_64 rng(5);
  const ControlPair u = random_control(p.mesh(), p.grid(), rng);
  const ControlPair v = random_control(p.mesh(), p.grid(), rng);
  const ControlPair w = random_control(p.mesh(), p.grid(), rng);
  double expected = 0.0;
  const Discretization& d = p.disc();
  for (int j = 0; j < v.slices(); ++j) {
    expected += 0.4 * d.grid().dt() * (v.bulk[j].values.array() * w.bulk[j].values.array() * d.bulk_mass().array()).sum();
    expected += 1.3 * d.grid().dt() * d.mesh().dx() * v.boundary[j].values.dot(w.boundary[j].values);
  }
  EXPECT_NEAR(quadratic_form_D2J(p, u, v, w), expected, 1e-13 * (1 + std::abs(expected)));
  EXPECT_EQ(quadratic_form_D2J(p, u, ControlPair::zeros(p.mesh(), p.grid()), w), 0.0);
}

TEST(SecondDerivative, SecondDifferenceOracleSymmetryAndBound) {
  const Problem p(small_spec());
  const ControlPair u = uniform_control(p.mesh(), p.grid(), -0.5, 0.5, 9);
  const SmoothEvaluation at = evaluate_smooth(p, u);
  std::mt19937_64 rng(17);
  const double j0 = at.cost;
  std::vector<double> bounds;
  for (int dir = 0; dir < 4; ++dir) {
    const ControlPair v = random_control(p.mesh(), p.grid(), rng);
    const ControlPair w = random_control(p.mesh(), p.grid(), rng);
    const double t = 1e-3;
    const double fd = (smooth_cost(p, u + t * v) - 2 * j0 + smooth_cost(p, u + (-t) * v)) / (t * t);
    const double q = quadratic_form_D2J(p, at, v, v);
    EXPECT_LE(rel_err(q, fd), 1e-4);
    const double vw = quadratic_form_D2J(p, at, v, w);
    const double wv = quadratic_form_D2J(p, at, w, v);
    EXPECT_NEAR(vw, wv, 1e-11 * (1 + std::abs(vw)));
    EXPECT_NEAR(quadratic_form_D2J(p, u, v, w), vw, 1e-11 * (1 + std::abs(vw)));
    bounds.push_back(std::abs(vw) / (p.disc().norm(v) * p.disc().norm(w)));
  }
  const auto [lo, hi] = std::minmax_element(bounds.begin(), bounds.end());
  EXPECT_TRUE(std::isfinite(*hi));
  EXPECT_LT(*hi, 100.0);
}
