#include "acsparse/geometry.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "acsparse/errors.hpp"

namespace acsparse {

Mesh::Mesh(int n_x, int n_y, double circumference, double height)
    : n_x_(n_x), n_y_(n_y), circumference_(circumference), height_(height) {
  if (n_x < 4) throw InvalidArgument("mesh: n_x must be >= 4, got " + std::to_string(n_x));
  if (n_y < 3) throw InvalidArgument("mesh: n_y must be >= 3, got " + std::to_string(n_y));
  if (!(circumference > 0.0) || !std::isfinite(circumference))
    throw InvalidArgument("mesh: circumference must be positive");
  if (!(height > 0.0) || !std::isfinite(height))
    throw InvalidArgument("mesh: height must be positive");
  dx_ = circumference_ / n_x_;
  dy_ = height_ / (n_y_ + 1);

  bulk_weights_.setConstant(bulk_size(), dx_ * dy_);
  for (int col = 0; col < n_x_; ++col) {
    bulk_weights_[index(0, col)] = 0.5 * dx_ * dy_;
    bulk_weights_[index(n_y_ + 1, col)] = 0.5 * dx_ * dy_;
  }
  boundary_weights_.setConstant(boundary_size(), dx_);
}

bool Mesh::operator==(const Mesh& other) const {
  return n_x_ == other.n_x_ && n_y_ == other.n_y_ && circumference_ == other.circumference_ &&
         height_ == other.height_;
}

Mesh build_mesh(int n_x, int n_y, double circumference, double height) {
  return Mesh(n_x, n_y, circumference, height);
}

BulkField BulkField::zeros(const Mesh& mesh) {
  return BulkField{Eigen::VectorXd::Zero(mesh.bulk_size())};
}

BulkField BulkField::constant(const Mesh& mesh, double value) {
  return BulkField{Eigen::VectorXd::Constant(mesh.bulk_size(), value)};
}

BoundaryField BoundaryField::zeros(const Mesh& mesh) {
  return BoundaryField{Eigen::VectorXd::Zero(mesh.boundary_size())};
}

BoundaryField BoundaryField::constant(const Mesh& mesh, double value) {
  return BoundaryField{Eigen::VectorXd::Constant(mesh.boundary_size(), value)};
}

BoundaryField CoupledField::boundary(const Mesh& mesh) const { return trace(bulk_, mesh); }

void check_conforms(const BulkField& f, const Mesh& mesh) {
  if (f.values.size() != mesh.bulk_size())
    throw ShapeMismatch("bulk field has " + std::to_string(f.values.size()) + " entries, mesh expects " +
                        std::to_string(mesh.bulk_size()));
}

void check_conforms(const BoundaryField& f, const Mesh& mesh) {
  if (f.values.size() != mesh.boundary_size())
    throw ShapeMismatch("boundary field has " + std::to_string(f.values.size()) +
                        " entries, mesh expects " + std::to_string(mesh.boundary_size()));
}

double inner_bulk(const BulkField& a, const BulkField& b, const Mesh& mesh) {
  check_conforms(a, mesh);
  check_conforms(b, mesh);
  return (a.values.array() * b.values.array() * mesh.bulk_weights().array()).sum();
}

double inner_boundary(const BoundaryField& a, const BoundaryField& b, const Mesh& mesh) {
  check_conforms(a, mesh);
  check_conforms(b, mesh);
  return mesh.dx() * a.values.dot(b.values);
}

BulkField apply_interior_laplacian(const BulkField& f, const Mesh& mesh) {
  check_conforms(f, mesh);
  const int nx = mesh.n_x();
  const double idx2 = 1.0 / (mesh.dx() * mesh.dx());
  const double idy2 = 1.0 / (mesh.dy() * mesh.dy());
  BulkField out = BulkField::zeros(mesh);
  for (int row = 1; row <= mesh.n_y(); ++row) {
    for (int col = 0; col < nx; ++col) {
      const int left = (col + nx - 1) % nx;
      const int right = (col + 1) % nx;
      const double c = f.at(mesh, row, col);
      out.at(mesh, row, col) =
          (f.at(mesh, row, left) - 2.0 * c + f.at(mesh, row, right)) * idx2 +
          (f.at(mesh, row - 1, col) - 2.0 * c + f.at(mesh, row + 1, col)) * idy2;
    }
  }
  return out;
}

BoundaryField apply_boundary_laplacian(const BoundaryField& g, const Mesh& mesh) {
  check_conforms(g, mesh);
  const int nx = mesh.n_x();
  const double idx2 = 1.0 / (mesh.dx() * mesh.dx());
  BoundaryField out = BoundaryField::zeros(mesh);
  for (int ring = 0; ring < 2; ++ring) {
    for (int col = 0; col < nx; ++col) {
      const int left = (col + nx - 1) % nx;
      const int right = (col + 1) % nx;
      out.at(mesh, ring, col) =
          (g.at(mesh, ring, left) - 2.0 * g.at(mesh, ring, col) + g.at(mesh, ring, right)) * idx2;
    }
  }
  return out;
}

BoundaryField normal_derivative(const BulkField& f, const Mesh& mesh) {
  check_conforms(f, mesh);
  const double inv = 1.0 / (2.0 * mesh.dy());
  const int top = mesh.n_y() + 1;
  BoundaryField out = BoundaryField::zeros(mesh);
  for (int col = 0; col < mesh.n_x(); ++col) {
    out.at(mesh, 0, col) =
        (3.0 * f.at(mesh, 0, col) - 4.0 * f.at(mesh, 1, col) + f.at(mesh, 2, col)) * inv;
    out.at(mesh, 1, col) =
        (3.0 * f.at(mesh, top, col) - 4.0 * f.at(mesh, top - 1, col) + f.at(mesh, top - 2, col)) * inv;
  }
  return out;
}

BoundaryField trace(const BulkField& f, const Mesh& mesh) {
  check_conforms(f, mesh);
  const int nx = mesh.n_x();
  BoundaryField out{Eigen::VectorXd(mesh.boundary_size())};
  out.values.head(nx) = f.values.segment(mesh.index(0, 0), nx);
  out.values.tail(nx) = f.values.segment(mesh.index(mesh.n_y() + 1, 0), nx);
  return out;
}

Eigen::VectorXd embed_boundary(const BoundaryField& g, const Mesh& mesh) {
  check_conforms(g, mesh);
  const int nx = mesh.n_x();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.bulk_size());
  out.segment(mesh.index(0, 0), nx) = g.values.head(nx);
  out.segment(mesh.index(mesh.n_y() + 1, 0), nx) = g.values.tail(nx);
  return out;
}

Eigen::VectorXd surface_mass(const Mesh& mesh) {
  return embed_boundary(BoundaryField{mesh.boundary_weights()}, mesh);
}

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh) {
  const int nx = mesh.n_x();
  const int rows = mesh.rows();
  const double dx = mesh.dx();
  const double dy = mesh.dy();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.bulk_size()) * 9);

  auto add_edge = [&](int a, int b, double coeff) {
    triplets.emplace_back(a, a, coeff);
    triplets.emplace_back(b, b, coeff);
    triplets.emplace_back(a, b, -coeff);
    triplets.emplace_back(b, a, -coeff);
  };

  for (int row = 0; row < rows; ++row) {
    const bool ring = mesh.is_boundary_row(row);
    // Bulk x-flux through the row's cell height, plus surface diffusion on rings.
    const double cx = (ring ? 0.5 * dy : dy) / dx + (ring ? 1.0 / dx : 0.0);
    for (int col = 0; col < nx; ++col) {
      add_edge(mesh.index(row, col), mesh.index(row, (col + 1) % nx), cx);
    }
  }
  const double cy = dx / dy;
  for (int row = 0; row + 1 < rows; ++row) {
    for (int col = 0; col < nx; ++col) {
      add_edge(mesh.index(row, col), mesh.index(row + 1, col), cy);
    }
  }

  Eigen::SparseMatrix<double> k(mesh.bulk_size(), mesh.bulk_size());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

}  // namespace acsparse
