#include "acsparse/discretization.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <string>

#include "acsparse/errors.hpp"

namespace acsparse {

TimeGrid::TimeGrid(double final_time, int n_t) : final_time_(final_time), n_t_(n_t) {
  if (!(final_time > 0.0) || !std::isfinite(final_time))
    throw InvalidArgument("time grid: final time must be positive");
  if (n_t < 2) throw InvalidArgument("time grid: n_t must be >= 2, got " + std::to_string(n_t));
}

double TimeGrid::node_weight(int n) const {
  return (n == 0 || n == n_t_) ? 0.5 * dt() : dt();
}

ControlPair ControlPair::zeros(const Mesh& mesh, const TimeGrid& grid) {
  return constant(mesh, grid, 0.0, 0.0);
}

ControlPair ControlPair::constant(const Mesh& mesh, const TimeGrid& grid, double bulk_value,
                                  double boundary_value) {
  ControlPair u;
  u.bulk.assign(grid.n_t(), BulkField::constant(mesh, bulk_value));
  u.boundary.assign(grid.n_t(), BoundaryField::constant(mesh, boundary_value));
  return u;
}

namespace {
void check_same_shape(const ControlPair& a, const ControlPair& b) {
  if (a.bulk.size() != b.bulk.size() || a.boundary.size() != b.boundary.size())
    throw ShapeMismatch("control pairs have different slice counts");
}
}  // namespace

ControlPair& ControlPair::operator+=(const ControlPair& other) { return axpy(1.0, other); }

ControlPair& ControlPair::operator-=(const ControlPair& other) { return axpy(-1.0, other); }

ControlPair& ControlPair::operator*=(double s) {
  for (auto& f : bulk) f.values *= s;
  for (auto& g : boundary) g.values *= s;
  return *this;
}

ControlPair& ControlPair::axpy(double s, const ControlPair& other) {
  check_same_shape(*this, other);
  for (std::size_t j = 0; j < bulk.size(); ++j) {
    if (bulk[j].values.size() != other.bulk[j].values.size() ||
        boundary[j].values.size() != other.boundary[j].values.size())
      throw ShapeMismatch("control slices differ in size");
    bulk[j].values += s * other.bulk[j].values;
    boundary[j].values += s * other.boundary[j].values;
  }
  return *this;
}

double ControlPair::max_abs() const {
  double m = 0.0;
  for (const auto& f : bulk) m = std::max(m, f.values.cwiseAbs().maxCoeff());
  for (const auto& g : boundary) m = std::max(m, g.values.cwiseAbs().maxCoeff());
  return m;
}

bool ControlPair::all_finite() const {
  for (const auto& f : bulk)
    if (!f.values.allFinite()) return false;
  for (const auto& g : boundary)
    if (!g.values.allFinite()) return false;
  return true;
}

bool ControlPair::operator==(const ControlPair& other) const {
  if (bulk.size() != other.bulk.size() || boundary.size() != other.boundary.size()) return false;
  for (std::size_t j = 0; j < bulk.size(); ++j) {
    if (bulk[j].values != other.bulk[j].values) return false;
    if (boundary[j].values != other.boundary[j].values) return false;
  }
  return true;
}

ControlPair operator+(ControlPair a, const ControlPair& b) { return a += b; }
ControlPair operator-(ControlPair a, const ControlPair& b) { return a -= b; }
ControlPair operator*(double s, ControlPair a) { return a *= s; }

void BoxBounds::validate() const {
  if (!std::isfinite(rho_min) || !std::isfinite(rho_max) || !std::isfinite(rho_gamma_min) ||
      !std::isfinite(rho_gamma_max))
    throw InvalidArgument("box bounds must be finite");
  if (rho_min > rho_max) throw InvalidArgument("box bounds: rho_min > rho_max");
  if (rho_gamma_min > rho_gamma_max) throw InvalidArgument("box bounds: rho_gamma_min > rho_gamma_max");
}

bool BoxBounds::contains_zero_strictly() const {
  return rho_min < 0.0 && 0.0 < rho_max && rho_gamma_min < 0.0 && 0.0 < rho_gamma_max;
}

bool BoxBounds::contains(const ControlPair& u) const {
  for (const auto& f : u.bulk)
    if (f.values.minCoeff() < rho_min || f.values.maxCoeff() > rho_max) return false;
  for (const auto& g : u.boundary)
    if (g.values.minCoeff() < rho_gamma_min || g.values.maxCoeff() > rho_gamma_max) return false;
  return true;
}

ControlPair BoxBounds::project(ControlPair u) const {
  for (auto& f : u.bulk) f.values = f.values.cwiseMax(rho_min).cwiseMin(rho_max);
  for (auto& g : u.boundary) g.values = g.values.cwiseMax(rho_gamma_min).cwiseMin(rho_gamma_max);
  return u;
}

Discretization::Discretization(Mesh mesh, TimeGrid grid)
    : mesh_(std::move(mesh)),
      grid_(grid),
      surface_mass_(acsparse::surface_mass(mesh_)),
      total_mass_(mesh_.bulk_weights() + surface_mass_),
      stiffness_(assemble_stiffness(mesh_)) {}

Eigen::VectorXd Discretization::forcing(const ControlPair& u, int slice) const {
  const auto& f = u.bulk[slice];
  const auto& g = u.boundary[slice];
  return bulk_mass().cwiseProduct(f.values) + surface_mass_.cwiseProduct(embed_boundary(g, mesh_));
}

void Discretization::check_control(const ControlPair& u) const {
  if (u.slices() != grid_.n_t() || static_cast<int>(u.boundary.size()) != grid_.n_t())
    throw ShapeMismatch("control pair must have " + std::to_string(grid_.n_t()) + " time slices");
  for (const auto& f : u.bulk) check_conforms(f, mesh_);
  for (const auto& g : u.boundary) check_conforms(g, mesh_);
}

void Discretization::check_trajectory(const Trajectory& traj) const {
  if (static_cast<int>(traj.states.size()) != grid_.n_t() + 1)
    throw ShapeMismatch("trajectory must have n_t + 1 = " + std::to_string(grid_.n_t() + 1) +
                        " entries");
  for (const auto& s : traj.states) check_conforms(s.bulk(), mesh_);
}

double Discretization::inner(const ControlPair& a, const ControlPair& b) const {
  check_control(a);
  check_control(b);
  const Eigen::VectorXd& wb = bulk_mass();
  double sum = 0.0;
  for (int j = 0; j < grid_.n_t(); ++j) {
    sum += (a.bulk[j].values.array() * b.bulk[j].values.array() * wb.array()).sum();
    sum += mesh_.dx() * a.boundary[j].values.dot(b.boundary[j].values);
  }
  return grid_.dt() * sum;
}

double Discretization::norm(const ControlPair& a) const { return std::sqrt(inner(a, a)); }

double Discretization::inner(const Trajectory& a, const Trajectory& b) const {
  check_trajectory(a);
  check_trajectory(b);
  double sum = 0.0;
  for (int n = 0; n <= grid_.n_t(); ++n) {
    const auto& x = a.states[n].values();
    const auto& y = b.states[n].values();
    sum += grid_.node_weight(n) * (x.array() * y.array() * total_mass_.array()).sum();
  }
  return sum;
}

double Discretization::norm(const Trajectory& a) const { return std::sqrt(inner(a, a)); }

double Discretization::norm(const AdjointTrajectory& a) const {
  Trajectory t{a.states};
  return norm(t);
}

CoupledKernel::CoupledKernel(const Discretization& disc, double iterative_tol)
    : work_(disc.stiffness()), iterative_tol_(iterative_tol) {
  const double inv_dt = 1.0 / disc.grid().dt();
  work_.makeCompressed();
  const int n = static_cast<int>(work_.rows());
  diagonal_slots_.assign(n, nullptr);
  for (int col = 0; col < n; ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(work_, col); it; ++it) {
      if (it.row() == col) diagonal_slots_[col] = &it.valueRef();
    }
    if (diagonal_slots_[col] == nullptr)
      throw InvalidArgument("stiffness matrix is missing a diagonal entry");
  }
  base_diagonal_.resize(n);
  for (int i = 0; i < n; ++i) {
    *diagonal_slots_[i] += disc.total_mass()[i] * inv_dt;
    base_diagonal_[i] = *diagonal_slots_[i];
  }
  lu_.analyzePattern(work_);
}

void CoupledKernel::factorize(const Eigen::VectorXd& reaction) {
  for (int i = 0; i < static_cast<int>(diagonal_slots_.size()); ++i) {
    *diagonal_slots_[i] = base_diagonal_[i] + reaction[i];
  }
  lu_.factorize(work_);
  lu_ok_ = lu_.info() == Eigen::Success;
}

Eigen::VectorXd CoupledKernel::solve(const Eigen::VectorXd& rhs) const {
  if (lu_ok_) {
    Eigen::VectorXd x = lu_.solve(rhs);
    if (lu_.info() == Eigen::Success && x.allFinite()) return x;
  }
  Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> iterative;
  iterative.setTolerance(iterative_tol_);
  iterative.setMaxIterations(10 * static_cast<int>(rhs.size()) + 100);
  iterative.compute(work_);
  Eigen::VectorXd x = iterative.solve(rhs);
  if (iterative.info() != Eigen::Success || !x.allFinite())
    throw LinearSolveFailure("coupled linear system could not be solved");
  return x;
}

}  // namespace acsparse
