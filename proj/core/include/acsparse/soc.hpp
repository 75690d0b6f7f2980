#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acsparse/objective.hpp"
#include "acsparse/problem.hpp"
#include "acsparse/sparsity.hpp"

namespace acsparse {

struct ConeSpec {
  ControlPair u;
  /// Adjoint slices p (see adjoint_to_control).
  ControlPair p;
  double alpha = 0.0;
  double alpha_gamma = 0.0;
  double nu = 1.0;
  double nu_gamma = 1.0;
  BoxBounds bounds;
  double tol_act = 1e-4;
  /// Build the larger cone that only zeroes v where p + alpha lambda + nu u
  /// is nonzero, instead of the critical cone of the sparse problem.
  bool simple = false;
  /// Subgradient used by the simple cone.
  std::optional<SubgradientPair> lambda;
};

/// Cone at a converged control with tol_act = 1e-4 max(alpha, nu ||u||_inf, 1).
ConeSpec make_cone(const Problem& problem, const ControlPair& u, const AdjointTrajectory& adjoint,
                   bool simple = false);

ControlPair project_to_critical_cone(const ControlPair& v, const ConeSpec& cone);

struct CoercivitySample {
  double rayleigh = 0.0;
  /// Central second difference of the smooth cost divided by ||v||^2, when
  /// requested.
  std::optional<double> oracle;
  std::optional<double> oracle_rel_error;
};

struct SocReport {
  int requested = 0;
  int kept = 0;
  bool all_projections_zero = false;
  double min_rayleigh = 0.0;
  double max_rayleigh = 0.0;
  std::vector<CoercivitySample> samples;
  /// Edges and counts of a histogram of the Rayleigh values.
  std::vector<double> histogram_edges;
  std::vector<int> histogram_counts;
  /// A positive minimum over samples is evidence on the sampled directions
  /// only; a negative value disproves coercivity at this tolerance.
  std::string label;
};

struct CoercivityOptions {
  int n_samples = 16;
  std::uint64_t seed = 0;
  bool simple_cone = false;
  /// Step of the second-difference oracle; 0 disables it.
  double oracle_step = 0.0;
  int histogram_bins = 8;
};

SocReport sample_coercivity(const Problem& problem, const ControlPair& u_star,
                            const CoercivityOptions& opts = {});

struct GrowthRow {
  double radius = 0.0;
  /// Smallest (J(u) - J(u*)) / ||u - u*||^2 over the sampled directions.
  double min_ratio = 0.0;
  /// Worst J(u) - J(u*) - sigma ||u - u*||^2 with the fitted sigma.
  double worst_slack = 0.0;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  /// Largest sigma with no sampled violation; nonpositive when some
  /// sampled point lies below J(u*).
  double sigma = 0.0;
};

GrowthReport quadratic_growth_probe(const Problem& problem, const ControlPair& u_star,
                                    const std::vector<double>& radii, int n_dirs,
                                    std::uint64_t seed);

struct TaylorReport {
  std::vector<double> steps;
  std::vector<double> first_remainder;
  std::vector<double> second_remainder;
  double first_slope = 0.0;
  double second_slope = 0.0;
};

TaylorReport taylor_test_DS(const Problem& problem, const ControlPair& u, const ControlPair& h,
                            const std::vector<double>& steps);

struct ContinuityRow {
  double scale = 0.0;
  double adjoint_diff = 0.0;
  double first_derivative_diff = 0.0;
  double second_derivative_diff = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  /// Least-squares log-log slope of the adjoint differences in the scale.
  double adjoint_rate = 0.0;
  bool adjoint_monotone = false;
  bool first_monotone = false;
  bool second_monotone = false;
};

/// Perturbs u* by scale * d for a fixed random d and compares adjoint,
/// DJ(u_k)[v] and D^2J(u_k)[v, v] against their values at u*.
ContinuityReport continuity_test_appendix(const Problem& problem, const ControlPair& u_star,
                                          const std::vector<double>& scales, std::uint64_t seed);

/// Node-wise standard normal control, deterministic in the generator state.
template <class Rng>
ControlPair random_control(const Mesh& mesh, const TimeGrid& grid, Rng& rng);

/// Least-squares slope of log(y) against log(x) over the positive entries.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace acsparse

#include <random>

namespace acsparse {

template <class Rng>
ControlPair random_control(const Mesh& mesh, const TimeGrid& grid, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ControlPair c = ControlPair::zeros(mesh, grid);
  for (auto& f : c.bulk)
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = normal(rng);
  for (auto& g : c.boundary)
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = normal(rng);
  return c;
}

}  // namespace acsparse
