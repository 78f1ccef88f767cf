#include "test_util.hpp"

using namespace semitrack;

namespace {

const ModelD& model() {
  static const ModelD m = reference_model(50);
  return m;
}

}  // namespace

TEST(SpatialField, GridWeightsIntegrateExactlyLinear) {
  const auto g = make_grid<double>(50);
  EXPECT_NEAR(g.weights.sum(), 1.0, 1e-14);
  EXPECT_NEAR(g.weights.dot(g.xi), 0.5, 1e-14);
  EXPECT_THROW(make_grid<double>(1), ParameterError);
}

TEST(SpatialField, K1OfUniformFieldAgainstFineQuadrature) {
  const auto& m = model();
  const Vec2d c(0.002, -0.001);
  FieldD z = c.replicate(1, m.grid.nodes());
  const Vec2d f = k1_functional(z, m.kernels, m.grid);
  for (int i = 0; i < 2; ++i) {
    const auto& ax = m.axles[i];
    const double brute = test::simpson([&](double x) { return ax.Fz * ax.sigma * pressure_profile(ax, x) * c(i); });
    EXPECT_NEAR(brute, ax.Fz * ax.sigma * c(i), 1e-9 * ax.Fz * ax.sigma);
    EXPECT_NEAR(f(i), brute, 1e-5 * std::abs(brute));
  }
  EXPECT_TRUE(k1_functional(FieldD::Zero(2, m.grid.nodes()), m.kernels, m.grid).isZero());
}

TEST(SpatialField, K2OfOnes) {
  const auto& m = model();
  const FieldD ones = FieldD::Ones(2, m.grid.nodes());
  const Vec2d k2 = k2_functional(ones, m.kernels, m.grid);
  EXPECT_NEAR(k2(0), -0.08, 1e-6);
  EXPECT_NEAR(k2(1), -0.08, 1e-6);
  const auto m0 = test::model_with(0.0);
  EXPECT_TRUE(k2_functional(ones, m0.kernels, m0.grid).isZero());
  EXPECT_TRUE(k3_functional(ones, m0.kernels, m0.grid).isZero());
}

TEST(SpatialField, K3OfOnesIsBoundaryPressure) {
  const auto& m = model();
  const FieldD ones = FieldD::Ones(2, m.grid.nodes());
  const Vec2d k3 = k3_functional(ones, m.kernels, m.grid);
  for (int i = 0; i < 2; ++i) {
    const auto& ax = m.axles[i];
    const double expected = m.body.vx * ax.psi / ax.L * pressure_profile(ax, 0.0);
    EXPECT_NEAR(k3(i), expected, 1e-5 * expected);
  }
}

TEST(SpatialField, PureTransportIsBidiagonal) {
  const auto m0 = test::model_with(0.0);
  const Eigen::MatrixXd A = assemble_discrete_A(m0.kernels, m0.grid, m0.mats);
  const int n = m0.grid.intervals;
  for (int i = 0; i < 2; ++i) {
    const double c = m0.mats.Lambda(i, i) / m0.grid.dxi;
    for (int a = 1; a <= n; ++a) {
      for (int b = 1; b <= n; ++b) {
        for (int j = 0; j < 2; ++j) {
          double expected = 0;
          if (i == j && a == b) expected = -c;
          if (i == j && b == a - 1) expected = c;
          EXPECT_DOUBLE_EQ(A(free_index(a, i), free_index(b, j)), expected);
        }
      }
    }
  }
}

TEST(SpatialField, AssembledOperatorMatchesFieldEvaluation) {
  const auto& m = model();
  std::mt19937_64 rng(3);
  const FieldD z = test::random_field(rng, m.grid);
  const Eigen::MatrixXd A = assemble_discrete_A(m.kernels, m.grid, m.mats);
  const FieldD direct = -(m.mats.Lambda.diagonal().asDiagonal() * upwind_derivative(z, m.grid));
  FieldD expected = direct;
  expected.colwise() += k3_functional(z, m.kernels, m.grid);
  expected.col(0).setZero();
  const FieldD assembled = from_free<double>(Eigen::VectorXd(A * to_free<double>(z)));
  EXPECT_LT((assembled - expected).cwiseAbs().maxCoeff(), 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST(SpatialField, WeightedOperatorIsDissipative) {
  const auto& m = model();
  const Eigen::MatrixXd A = assemble_discrete_A(m.kernels, m.grid, m.mats);
  const Eigen::VectorXd q = to_free<double>(m.kernels.Q);
  const Eigen::VectorXd w = free_weights(m.grid);
  const Eigen::MatrixXd QA = (w.cwiseProduct(q)).asDiagonal() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (QA + QA.transpose()));
  EXPECT_LT(es.eigenvalues().maxCoeff(), 0.0);
  EXPECT_GT(upwind_dissipativity_constant(m), 0.0);
}

TEST(SpatialField, DissipativityConstantConvergesUnderRefinement) {
  const double w50 = dissipativity_constant(reference_model(50));
  const double w200 = dissipativity_constant(reference_model(200));
  EXPECT_GT(w50, 0.0);
  EXPECT_GT(w200, 0.0);
  EXPECT_LT(std::abs(w50 - w200) / w200, 0.10);
  // The upwind operator adds numerical dissipation, so its constant is larger.
  EXPECT_GE(upwind_dissipativity_constant(reference_model(50)), w50);
}

TEST(SpatialField, PureTransportDissipationClosedForm) {
  // psi = 0: the form is diagonal, 1/2 Lambda |Q'| at interior nodes plus the outflow term,
  // so the smallest weighted entry sits at the last interior node.
  const auto m0 = test::model_with(0.0);
  const int n = m0.grid.intervals;
  double expected = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    const auto& ax = m0.axles[i];
    const double q = ax.Fz * ax.sigma * pressure_profile(ax, m0.grid.xi(n - 1)) / (2 * ax.phi);
    expected = std::min(expected, 0.5 * m0.mats.Lambda(i, i) * ax.a * q);
  }
  EXPECT_NEAR(dissipativity_constant(m0), expected, 1e-9 * expected);
}

TEST(SpatialField, NormOfInitialDeflection) {
  const auto& m = model();
  const FieldD z0 = test::uniform_field(Vec2d(0.003, 0.003), m.grid);
  EXPECT_NEAR(l2_norm(z0, m.grid), 0.0042, 1e-4);
  EXPECT_DOUBLE_EQ(l2_norm(FieldD::Zero(2, m.grid.nodes()), m.grid), 0.0);
}
