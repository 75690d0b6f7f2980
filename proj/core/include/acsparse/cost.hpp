#pragma once

#include <string_view>
#include <vector>

#include "acsparse/discretization.hpp"

namespace acsparse {

/// Tracking weights beta1..beta4, control costs nu, nu_gamma and sparsity
/// parameters alpha, alpha_gamma.
struct CostWeights {
  double beta1 = 1.0;
  double beta2 = 1.0;
  double beta3 = 0.0;
  double beta4 = 0.0;
  double nu = 1.0;
  double nu_gamma = 1.0;
  double alpha = 0.0;
  double alpha_gamma = 0.0;
};

enum class SparsityMode { none, full, time_directional };

std::string_view to_string(SparsityMode mode);
SparsityMode parse_sparsity_mode(std::string_view text);

/// Desired states. y_q and y_sigma are sampled at the n_t + 1 time nodes.
struct Targets {
  std::vector<BulkField> y_q;
  std::vector<BoundaryField> y_sigma;
  BulkField y_omega_T;
  BoundaryField y_gamma_T;

  static Targets zeros(const Mesh& mesh, const TimeGrid& grid);
  /// Targets equal to a given trajectory everywhere (terminal included).
  static Targets from_trajectory(const Mesh& mesh, const Trajectory& traj);
  void check(const Mesh& mesh, const TimeGrid& grid) const;
};

}  // namespace acsparse
