#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "acsparse/errors.hpp"
#include "acsparse/geometry.hpp"

using namespace acsparse;

namespace {

BulkField random_bulk(const Mesh& m, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  BulkField f = BulkField::zeros(m);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = d(rng);
  return f;
}

BoundaryField random_ring(const Mesh& m, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  BoundaryField g = BoundaryField::zeros(m);
  for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = d(rng);
  return g;
}

}  // namespace

TEST(Mesh, DerivedSpacings) {
  const Mesh a = build_mesh(8, 4, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.dx(), 0.125);
  EXPECT_DOUBLE_EQ(a.dy(), 0.2);
  const Mesh b = build_mesh(4, 3, 2.0, 0.5);
  EXPECT_DOUBLE_EQ(b.dx(), 0.5);
  EXPECT_DOUBLE_EQ(b.dy(), 0.125);
  EXPECT_EQ(a.rows(), 6);
  EXPECT_EQ(a.bulk_size(), 48);
  EXPECT_EQ(a.boundary_size(), 16);
}

TEST(Mesh, RejectsBadArguments) {
  EXPECT_THROW(build_mesh(3, 4, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(build_mesh(8, 2, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(build_mesh(8, 4, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(build_mesh(8, 4, 1.0, -1.0), InvalidArgument);
}

TEST(Mesh, WeightsSumToAreaAndRingLength) {
  for (auto [nx, ny, c, h] : {std::tuple{8, 4, 1.0, 1.0}, {5, 7, 2.5, 0.3}, {16, 6, 1.0, 1.0}}) {
    const Mesh m = build_mesh(nx, ny, c, h);
    EXPECT_NEAR(m.bulk_weights().sum(), c * h, 1e-14 * c * h);
    EXPECT_NEAR(m.boundary_weights().head(nx).sum(), c, 1e-14 * c);
    EXPECT_NEAR(m.boundary_weights().tail(nx).sum(), c, 1e-14 * c);
  }
}

TEST(InnerProducts, Examples) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  const BulkField one = BulkField::constant(m, 1.0);
  EXPECT_NEAR(inner_bulk(one, one, m), 1.0, 1e-15);
  std::mt19937_64 rng(3);
  EXPECT_EQ(inner_bulk(random_bulk(m, rng), BulkField::zeros(m), m), 0.0);
  const BoundaryField ring = BoundaryField::constant(m, 1.0);
  EXPECT_NEAR(inner_boundary(ring, ring, m), 2.0, 1e-15);
  EXPECT_EQ(inner_boundary(BoundaryField::zeros(m), random_ring(m, rng), m), 0.0);
}

TEST(InnerProducts, MatchExplicitQuadrature) {
  const Mesh m = build_mesh(7, 5, 1.3, 0.7);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const BulkField a = random_bulk(m, rng);
    const BulkField b = random_bulk(m, rng);
    double expected = 0.0;
    for (int row = 0; row < m.rows(); ++row) {
      const double cell = (row == 0 || row == m.rows() - 1) ? 0.5 : 1.0;
      for (int col = 0; col < m.n_x(); ++col)
        expected += cell * m.dx() * m.dy() * a.at(m, row, col) * b.at(m, row, col);
    }
    EXPECT_NEAR(inner_bulk(a, b, m), expected, 1e-13);
    EXPECT_NEAR(inner_bulk(a, b, m), inner_bulk(b, a, m), 1e-15);
    EXPECT_GT(inner_bulk(a, a, m), 0.0);

    const BoundaryField g = random_ring(m, rng);
    const BoundaryField h = random_ring(m, rng);
    double ring_expected = 0.0;
    for (int ring = 0; ring < 2; ++ring)
      for (int col = 0; col < m.n_x(); ++col)
        ring_expected += m.dx() * g.at(m, ring, col) * h.at(m, ring, col);
    EXPECT_NEAR(inner_boundary(g, h, m), ring_expected, 1e-13);
  }
}

TEST(InnerProducts, ShapeMismatch) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  const Mesh other = build_mesh(8, 5, 1.0, 1.0);
  EXPECT_THROW(inner_bulk(BulkField::zeros(m), BulkField::zeros(other), m), ShapeMismatch);
  EXPECT_THROW(inner_boundary(BoundaryField::zeros(m), BoundaryField{Eigen::VectorXd::Zero(3)}, m),
               ShapeMismatch);
  EXPECT_THROW(apply_interior_laplacian(BulkField::zeros(other), m), ShapeMismatch);
}

TEST(InteriorLaplacian, ConstantAndLinearProfiles) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  const BulkField lc = apply_interior_laplacian(BulkField::constant(m, 2.5), m);
  EXPECT_LT(lc.values.cwiseAbs().maxCoeff(), 1e-12);
  BulkField lin = BulkField::zeros(m);
  for (int row = 0; row < m.rows(); ++row)
    for (int col = 0; col < m.n_x(); ++col) lin.at(m, row, col) = 1.7 * m.z(row);
  const BulkField ll = apply_interior_laplacian(lin, m);
  for (int row = 1; row <= m.n_y(); ++row)
    for (int col = 0; col < m.n_x(); ++col) EXPECT_NEAR(ll.at(m, row, col), 0.0, 1e-11);
}

TEST(InteriorLaplacian, FourierModeIsEigenfield) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  BulkField f = BulkField::zeros(m);
  for (int row = 0; row < m.rows(); ++row)
    for (int col = 0; col < m.n_x(); ++col)
      f.at(m, row, col) = std::cos(2 * std::numbers::pi * m.x(col) / m.circumference());
  const double symbol =
      (2.0 / (m.dx() * m.dx())) * (1.0 - std::cos(2 * std::numbers::pi * m.dx() / m.circumference()));
  const BulkField lf = apply_interior_laplacian(f, m);
  // The operator is Delta_h (negative semidefinite); -Delta_h has the positive symbol.
  for (int row = 1; row <= m.n_y(); ++row)
    for (int col = 0; col < m.n_x(); ++col)
      EXPECT_NEAR(lf.at(m, row, col), -symbol * f.at(m, row, col), 1e-10);
  for (int col = 0; col < m.n_x(); ++col) {
    EXPECT_EQ(lf.at(m, 0, col), 0.0);
    EXPECT_EQ(lf.at(m, m.rows() - 1, col), 0.0);
  }
}

TEST(InteriorLaplacian, SymmetricNegativeSemidefiniteOnInteriorFields) {
  const Mesh m = build_mesh(9, 5, 1.0, 0.8);
  std::mt19937_64 rng(5);
  auto interior = [&] {
    BulkField f = random_bulk(m, rng);
    for (int col = 0; col < m.n_x(); ++col) {
      f.at(m, 0, col) = 0.0;
      f.at(m, m.rows() - 1, col) = 0.0;
    }
    return f;
  };
  for (int t = 0; t < 5; ++t) {
    const BulkField f = interior();
    const BulkField g = interior();
    const double fg = inner_bulk(apply_interior_laplacian(f, m), g, m);
    const double gf = inner_bulk(f, apply_interior_laplacian(g, m), m);
    EXPECT_NEAR(fg, gf, 1e-10 * (1 + std::abs(fg)));
    EXPECT_LE(inner_bulk(apply_interior_laplacian(f, m), f, m), 1e-12);
  }
}

TEST(BoundaryLaplacian, ConstantFourierAndCirculant) {
  const Mesh m = build_mesh(10, 3, 2.0, 1.0);
  EXPECT_LT(apply_boundary_laplacian(BoundaryField::constant(m, 4.0), m).values.cwiseAbs().maxCoeff(),
            1e-12);
  for (int k = 1; k <= 3; ++k) {
    BoundaryField g = BoundaryField::zeros(m);
    for (int ring = 0; ring < 2; ++ring)
      for (int col = 0; col < m.n_x(); ++col)
        g.at(m, ring, col) = std::cos(2 * std::numbers::pi * k * m.x(col) / m.circumference());
    const double eig = -(2.0 / (m.dx() * m.dx())) *
                       (1.0 - std::cos(2 * std::numbers::pi * k * m.dx() / m.circumference()));
    const BoundaryField lg = apply_boundary_laplacian(g, m);
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
      EXPECT_NEAR(lg.values[i], eig * g.values[i], 1e-10);
  }
  // Dense circulant oracle, one block per ring.
  const int n = m.n_x();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = -2.0;
    c(i, (i + 1) % n) += 1.0;
    c(i, (i + n - 1) % n) += 1.0;
  }
  c /= m.dx() * m.dx();
  std::mt19937_64 rng(2);
  const BoundaryField g = random_ring(m, rng);
  const BoundaryField lg = apply_boundary_laplacian(g, m);
  EXPECT_LT((lg.values.head(n) - c * g.values.head(n)).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT((lg.values.tail(n) - c * g.values.tail(n)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(BoundaryLaplacian, GreenIdentityAndDefiniteness) {
  const Mesh m = build_mesh(12, 3, 1.5, 1.0);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    const BoundaryField v = random_ring(m, rng);
    const BoundaryField w = random_ring(m, rng);
    BoundaryField minus_lv = apply_boundary_laplacian(v, m);
    minus_lv.values = -minus_lv.values;
    double grad = 0.0;
    for (int ring = 0; ring < 2; ++ring)
      for (int col = 0; col < m.n_x(); ++col) {
        const int next = (col + 1) % m.n_x();
        grad += m.dx() * (v.at(m, ring, next) - v.at(m, ring, col)) / m.dx() *
                (w.at(m, ring, next) - w.at(m, ring, col)) / m.dx();
      }
    EXPECT_NEAR(inner_boundary(minus_lv, w, m), grad, 1e-10 * (1 + std::abs(grad)));
    EXPECT_NEAR(inner_boundary(apply_boundary_laplacian(v, m), w, m),
                inner_boundary(v, apply_boundary_laplacian(w, m), m), 1e-9);
    EXPECT_LE(inner_boundary(apply_boundary_laplacian(v, m), v, m), 1e-12);
  }
}

TEST(NormalDerivative, ConstantLinearQuadratic) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  EXPECT_LT(normal_derivative(BulkField::constant(m, 3.0), m).values.cwiseAbs().maxCoeff(), 1e-12);
  const double a = 2.5;
  BulkField lin = BulkField::zeros(m);
  BulkField quad = BulkField::zeros(m);
  for (int row = 0; row < m.rows(); ++row)
    for (int col = 0; col < m.n_x(); ++col) {
      const double z = m.z(row);
      lin.at(m, row, col) = a * z;
      quad.at(m, row, col) = 0.7 * z * z - 0.4 * z + 1.0;
    }
  const BoundaryField dl = normal_derivative(lin, m);
  const BoundaryField dq = normal_derivative(quad, m);
  for (int col = 0; col < m.n_x(); ++col) {
    EXPECT_NEAR(dl.at(m, 0, col), -a, 1e-12);
    EXPECT_NEAR(dl.at(m, 1, col), a, 1e-12);
    // Outward derivative: -q'(0) at the bottom, q'(H) at the top.
    EXPECT_NEAR(dq.at(m, 0, col), 0.4, 1e-12);
    EXPECT_NEAR(dq.at(m, 1, col), 2 * 0.7 * m.height() - 0.4, 1e-12);
  }
}

TEST(Trace, CopiesRingRowsAndMatchesCoupledField) {
  const Mesh m = build_mesh(8, 4, 1.0, 1.0);
  const BoundaryField t3 = trace(BulkField::constant(m, 3.0), m);
  EXPECT_TRUE((t3.values.array() == 3.0).all());
  BulkField f = BulkField::zeros(m);
  for (int col = 0; col < m.n_x(); ++col) {
    f.at(m, 0, col) = 7.0;
    f.at(m, m.rows() - 1, col) = 7.0;
  }
  EXPECT_TRUE((trace(f, m).values.array() == 7.0).all());
  std::mt19937_64 rng(1);
  const BulkField g = random_bulk(m, rng);
  const CoupledField c(g);
  EXPECT_EQ(c.boundary(m).values, trace(g, m).values);
  EXPECT_EQ(trace(BulkField{embed_boundary(trace(g, m), m)}, m).values, trace(g, m).values);
}

TEST(Operators, Linearity) {
  const Mesh m = build_mesh(7, 4, 1.2, 0.9);
  std::mt19937_64 rng(21);
  const BulkField f = random_bulk(m, rng);
  const BulkField g = random_bulk(m, rng);
  const double a = 1.3;
  const double b = -0.6;
  const BulkField comb{a * f.values + b * g.values};
  auto check = [](const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * (1 + rhs.cwiseAbs().maxCoeff()));
  };
  check(apply_interior_laplacian(comb, m).values,
        a * apply_interior_laplacian(f, m).values + b * apply_interior_laplacian(g, m).values);
  check(normal_derivative(comb, m).values,
        a * normal_derivative(f, m).values + b * normal_derivative(g, m).values);
  check(trace(comb, m).values, a * trace(f, m).values + b * trace(g, m).values);
  const BoundaryField r = random_ring(m, rng);
  const BoundaryField s = random_ring(m, rng);
  check(apply_boundary_laplacian(BoundaryField{a * r.values + b * s.values}, m).values,
        a * apply_boundary_laplacian(r, m).values + b * apply_boundary_laplacian(s, m).values);
}

TEST(Stiffness, SymmetricAnnihilatesConstantsAndMatchesInteriorStencil) {
  const Mesh m = build_mesh(8, 5, 1.0, 1.0);
  const Eigen::SparseMatrix<double> k = assemble_stiffness(m);
  const Eigen::MatrixXd dense(k);
  EXPECT_LT((dense - dense.transpose()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((dense * Eigen::VectorXd::Ones(m.bulk_size())).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);

  std::mt19937_64 rng(4);
  const BulkField f = random_bulk(m, rng);
  const Eigen::VectorXd kf = k * f.values;
  const BulkField lf = apply_interior_laplacian(f, m);
  for (int row = 1; row <= m.n_y(); ++row)
    for (int col = 0; col < m.n_x(); ++col) {
      const int i = m.index(row, col);
      EXPECT_NEAR(kf[i], -m.bulk_weights()[i] * lf.values[i], 1e-10);
    }
  // Ring rows: surface diffusion, half-cell x-flux and the normal flux.
  const BoundaryField lg = apply_boundary_laplacian(trace(f, m), m);
  for (int col = 0; col < m.n_x(); ++col) {
    const int i = m.index(0, col);
    const int l = m.index(0, (col + m.n_x() - 1) % m.n_x());
    const int r = m.index(0, (col + 1) % m.n_x());
    const double dxx = (f.values[l] - 2 * f.values[i] + f.values[r]) / (m.dx() * m.dx());
    const double expected = -m.dx() * lg.at(m, 0, col) - 0.5 * m.dx() * m.dy() * dxx +
                            m.dx() * (f.values[i] - f.values[m.index(1, col)]) / m.dy();
    EXPECT_NEAR(kf[i], expected, 1e-10);
  }
}
