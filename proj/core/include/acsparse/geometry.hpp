#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace acsparse {

/// Structured grid on the flat cylinder S^1 x [0, height].
///
/// Nodes are laid out row-major: (n_y + 2) rows of n_x periodic columns.
/// Rows 0 and n_y + 1 are the two boundary rings; rows 1..n_y are interior.
/// Bulk quadrature uses full cells (dx * dy) on interior rows and half cells
/// on the rings, so the weights sum to circumference * height.
class Mesh {
 public:
  Mesh(int n_x, int n_y, double circumference, double height);

  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }
  int rows() const { return n_y_ + 2; }
  double circumference() const { return circumference_; }
  double height() const { return height_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }

  /// Number of nodes in a bulk field (boundary rings included).
  int bulk_size() const { return rows() * n_x_; }
  /// Number of nodes in a boundary field (two rings).
  int boundary_size() const { return 2 * n_x_; }

  int index(int row, int col) const { return row * n_x_ + col; }
  /// Bulk row occupied by ring 0 (bottom) or ring 1 (top).
  int ring_row(int ring) const { return ring == 0 ? 0 : n_y_ + 1; }
  bool is_boundary_row(int row) const { return row == 0 || row == n_y_ + 1; }

  double x(int col) const { return col * dx_; }
  double z(int row) const { return row * dy_; }

  double area() const { return circumference_ * height_; }
  double boundary_length() const { return 2.0 * circumference_; }

  /// Bulk quadrature weight of every node.
  const Eigen::VectorXd& bulk_weights() const { return bulk_weights_; }
  /// Ring quadrature weight of every boundary node (all equal to dx).
  const Eigen::VectorXd& boundary_weights() const { return boundary_weights_; }

  bool operator==(const Mesh& other) const;

 private:
  int n_x_;
  int n_y_;
  double circumference_;
  double height_;
  double dx_;
  double dy_;
  Eigen::VectorXd bulk_weights_;
  Eigen::VectorXd boundary_weights_;
};

Mesh build_mesh(int n_x, int n_y, double circumference, double height);

struct BulkField {
  Eigen::VectorXd values;

  static BulkField zeros(const Mesh& mesh);
  static BulkField constant(const Mesh& mesh, double value);
  double& at(const Mesh& mesh, int row, int col) { return values[mesh.index(row, col)]; }
  double at(const Mesh& mesh, int row, int col) const { return values[mesh.index(row, col)]; }
};

struct BoundaryField {
  Eigen::VectorXd values;

  static BoundaryField zeros(const Mesh& mesh);
  static BoundaryField constant(const Mesh& mesh, double value);
  double& at(const Mesh& mesh, int ring, int col) { return values[ring * mesh.n_x() + col]; }
  double at(const Mesh& mesh, int ring, int col) const { return values[ring * mesh.n_x() + col]; }
};

/// Bulk field together with its boundary trace. Only the bulk values are
/// stored; the boundary component is read off the ring rows, so the trace
/// constraint holds by construction.
class CoupledField {
 public:
  CoupledField() = default;
  explicit CoupledField(BulkField bulk) : bulk_(std::move(bulk)) {}

  static CoupledField zeros(const Mesh& mesh) { return CoupledField(BulkField::zeros(mesh)); }
  static CoupledField constant(const Mesh& mesh, double v) {
    return CoupledField(BulkField::constant(mesh, v));
  }

  const BulkField& bulk() const { return bulk_; }
  BulkField& bulk() { return bulk_; }
  const Eigen::VectorXd& values() const { return bulk_.values; }
  Eigen::VectorXd& values() { return bulk_.values; }
  BoundaryField boundary(const Mesh& mesh) const;

 private:
  BulkField bulk_;
};

void check_conforms(const BulkField& f, const Mesh& mesh);
void check_conforms(const BoundaryField& f, const Mesh& mesh);

/// Discrete L2(Omega) product.
double inner_bulk(const BulkField& a, const BulkField& b, const Mesh& mesh);
/// Discrete L2(Gamma) product over both rings.
double inner_boundary(const BoundaryField& a, const BoundaryField& b, const Mesh& mesh);

/// 5-point Laplacian, periodic in x, on interior rows. Ring rows are zero.
BulkField apply_interior_laplacian(const BulkField& f, const Mesh& mesh);
/// Periodic second difference on each ring.
BoundaryField apply_boundary_laplacian(const BoundaryField& g, const Mesh& mesh);
/// Outward normal derivative from the one-sided 3-node stencil.
BoundaryField normal_derivative(const BulkField& f, const Mesh& mesh);
BoundaryField trace(const BulkField& f, const Mesh& mesh);

/// Scatters a boundary field onto the ring rows of a zero bulk vector.
Eigen::VectorXd embed_boundary(const BoundaryField& g, const Mesh& mesh);

/// Ring quadrature weights placed on the ring rows of a bulk-sized vector
/// (zero on interior rows).
Eigen::VectorXd surface_mass(const Mesh& mesh);

/// Symmetric stiffness matrix of the coupled Dirichlet energy
///   int_Omega |grad v|^2 + int_Gamma |grad_Gamma v_Gamma|^2
/// on bulk-sized vectors. x-edges of ring rows carry half-cell weight.
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh);

}  // namespace acsparse
