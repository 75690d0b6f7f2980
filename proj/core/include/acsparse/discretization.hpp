#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <vector>

#include "acsparse/geometry.hpp"

namespace acsparse {

/// Uniform grid 0 = t_0 < ... < t_{n_t} = T.
class TimeGrid {
 public:
  TimeGrid(double final_time, int n_t);

  double final_time() const { return final_time_; }
  int n_t() const { return n_t_; }
  double dt() const { return final_time_ / n_t_; }
  double time(int n) const { return n * dt(); }
  /// Trapezoid weight of state node n in time integrals.
  double node_weight(int n) const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double final_time_;
  int n_t_;
};

/// Distributed control u on Q and boundary control u_Gamma on Sigma.
///
/// Controls are piecewise constant in time: slice j acts on (t_j, t_{j+1}],
/// j = 0..n_t-1, and drives the implicit Euler step j -> j+1. The two
/// components are independent; u is not tied to u_Gamma on the boundary.
struct ControlPair {
  std::vector<BulkField> bulk;
  std::vector<BoundaryField> boundary;

  static ControlPair zeros(const Mesh& mesh, const TimeGrid& grid);
  static ControlPair constant(const Mesh& mesh, const TimeGrid& grid, double bulk_value,
                              double boundary_value);

  int slices() const { return static_cast<int>(bulk.size()); }

  ControlPair& operator+=(const ControlPair& other);
  ControlPair& operator-=(const ControlPair& other);
  ControlPair& operator*=(double s);
  /// this += s * other
  ControlPair& axpy(double s, const ControlPair& other);
  double max_abs() const;
  bool all_finite() const;
  bool operator==(const ControlPair& other) const;
};

ControlPair operator+(ControlPair a, const ControlPair& b);
ControlPair operator-(ControlPair a, const ControlPair& b);
ControlPair operator*(double s, ControlPair a);

/// Box constraints defining the admissible controls.
struct BoxBounds {
  double rho_min = -1.0;
  double rho_max = 1.0;
  double rho_gamma_min = -1.0;
  double rho_gamma_max = 1.0;

  void validate() const;
  /// rho_min < 0 < rho_max and the same on the boundary.
  bool contains_zero_strictly() const;
  bool contains(const ControlPair& u) const;
  ControlPair project(ControlPair u) const;
};

/// States at nodes t_0..t_{n_t}; entry 0 is the initial datum.
struct Trajectory {
  std::vector<CoupledField> states;
};

/// Adjoint states p_0..p_{n_t}; entry n_t is the terminal datum and entry j
/// (j < n_t) is the multiplier paired with control slice j.
struct AdjointTrajectory {
  std::vector<CoupledField> states;
};

/// Mesh, time grid, and the assembled spatial operators shared by every
/// solver.
///
/// The semi-discrete coupled system reads
///   M y' + K y + N(y) = B u,
/// with M = M_Omega + M_Gamma (lumped masses on all nodes, ring weights on
/// the boundary rows), K the stiffness of the bulk plus surface Dirichlet
/// energy, N(y) = M_Omega f'(y) + M_Gamma f_Gamma'(y) and
/// B u = M_Omega u + M_Gamma u_Gamma.
class Discretization {
 public:
  Discretization(Mesh mesh, TimeGrid grid);

  const Mesh& mesh() const { return mesh_; }
  const TimeGrid& grid() const { return grid_; }

  const Eigen::VectorXd& bulk_mass() const { return mesh_.bulk_weights(); }
  const Eigen::VectorXd& surface_mass() const { return surface_mass_; }
  const Eigen::VectorXd& total_mass() const { return total_mass_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

  /// B u for control slice j, as a bulk-sized vector.
  Eigen::VectorXd forcing(const ControlPair& u, int slice) const;

  void check_control(const ControlPair& u) const;
  void check_trajectory(const Trajectory& traj) const;

  /// L2(0,T; L2(Omega) x L2(Gamma)) product of controls.
  double inner(const ControlPair& a, const ControlPair& b) const;
  double norm(const ControlPair& a) const;

  /// Trapezoid-in-time product of state trajectories over Q and Sigma.
  double inner(const Trajectory& a, const Trajectory& b) const;
  double norm(const Trajectory& a) const;
  double norm(const AdjointTrajectory& a) const;

  /// Space-time measure |Q| and |Sigma| of the control domain.
  double bulk_measure() const { return mesh_.area() * grid_.final_time(); }
  double boundary_measure() const { return mesh_.boundary_length() * grid_.final_time(); }

 private:
  Mesh mesh_;
  TimeGrid grid_;
  Eigen::VectorXd surface_mass_;
  Eigen::VectorXd total_mass_;
  Eigen::SparseMatrix<double> stiffness_;
};

/// Factorizes and solves M/dt + K + diag(reaction) with a sparse LU, falling
/// back to diagonally preconditioned BiCGSTAB when the factorization fails.
class CoupledKernel {
 public:
  explicit CoupledKernel(const Discretization& disc, double iterative_tol = 1e-14);

  void factorize(const Eigen::VectorXd& reaction);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  const Eigen::SparseMatrix<double>& matrix() const { return work_; }

 private:
  Eigen::SparseMatrix<double> work_;
  Eigen::VectorXd base_diagonal_;
  std::vector<double*> diagonal_slots_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool lu_ok_ = false;
  double iterative_tol_;
};

}  // namespace acsparse
