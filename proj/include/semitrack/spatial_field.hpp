#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "semitrack/model_core.hpp"

namespace semitrack {

/// Bristle deflection sampled on the grid: column k holds z(xi_k) for both axles.
template <typename Scalar>
using Field = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

/// Uniform grid on [0, 1] with composite trapezoidal weights.
template <typename Scalar>
struct Grid {
  int intervals = 0;
  Scalar dxi = Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> xi;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;

  int nodes() const { return intervals + 1; }
};

template <typename Scalar>
Grid<Scalar> make_grid(int intervals) {
  if (intervals < 2) throw ParameterError("grid needs at least two intervals");
  Grid<Scalar> g;
  g.intervals = intervals;
  g.dxi = Scalar(1) / Scalar(intervals);
  g.xi.resize(intervals + 1);
  g.weights.setConstant(intervals + 1, g.dxi);
  for (int k = 0; k <= intervals; ++k) g.xi(k) = Scalar(k) / Scalar(intervals);
  g.weights(0) *= Scalar(0.5);
  g.weights(intervals) *= Scalar(0.5);
  return g;
}

/// Diagonal kernels of the nonlocal functionals sampled per node, plus the
/// boundary gain K4 and the storage weight Q = K1 H^{-1}.
template <typename Scalar>
struct KernelSet {
  Field<Scalar> K1, K2, K3, Q;
  Vec2<Scalar> K4;
};

template <typename Scalar>
KernelSet<Scalar> make_kernels(const VehicleBodyParams<Scalar>& body,
                               const std::array<AxleTireParams<Scalar>, 2>& axles, const Grid<Scalar>& g) {
  KernelSet<Scalar> k;
  const int n = g.nodes();
  k.K1.resize(2, n);
  k.K2.resize(2, n);
  k.K3.resize(2, n);
  k.Q.resize(2, n);
  for (int i = 0; i < 2; ++i) {
    const auto& ax = axles[i];
    for (int j = 0; j < n; ++j) {
      const Scalar p = pressure_profile(ax, g.xi(j));
      k.K1(i, j) = ax.Fz * ax.sigma * p;
      k.K2(i, j) = -ax.psi * p;
      k.K3(i, j) = -body.vx * ax.psi / ax.L * pressure_slope(ax, g.xi(j));
      k.Q(i, j) = k.K1(i, j) / (Scalar(2) * ax.phi);
    }
    k.K4(i) = body.vx * ax.psi / ax.L * pressure_profile(ax, Scalar(1));
  }
  return k;
}

namespace detail {
template <typename Scalar, typename Derived>
void check_size(const Eigen::MatrixBase<Derived>& z, const Grid<Scalar>& g) {
  if (z.rows() != 2 || z.cols() != g.nodes()) {
    throw std::invalid_argument("field size does not match grid");
  }
}
}  // namespace detail

/// Trapezoidal integral of a diagonal kernel against a field.
template <typename Scalar, typename Derived>
Vec2<Scalar> integrate_kernel(const Field<Scalar>& kernel, const Eigen::MatrixBase<Derived>& z,
                              const Grid<Scalar>& g) {
  detail::check_size(z, g);
  return kernel.cwiseProduct(z) * g.weights;
}

/// Axle forces [F_y1, F_y2] = int K1 z.
template <typename Scalar, typename Derived>
Vec2<Scalar> k1_functional(const Eigen::MatrixBase<Derived>& z, const KernelSet<Scalar>& k,
                           const Grid<Scalar>& g) {
  return integrate_kernel(k.K1, z, g);
}

template <typename Scalar, typename Derived>
Vec2<Scalar> k2_functional(const Eigen::MatrixBase<Derived>& z, const KernelSet<Scalar>& k,
                           const Grid<Scalar>& g) {
  return integrate_kernel(k.K2, z, g);
}

/// int K3 z + K4 z(1).
template <typename Scalar, typename Derived>
Vec2<Scalar> k3_functional(const Eigen::MatrixBase<Derived>& z, const KernelSet<Scalar>& k,
                           const Grid<Scalar>& g) {
  return integrate_kernel(k.K3, z, g) + k.K4.cwiseProduct(z.col(g.intervals));
}

/// First-order upwind dz/dxi (flow towards +xi); the inflow node gets zero.
template <typename Scalar, typename Derived>
Field<Scalar> upwind_derivative(const Eigen::MatrixBase<Derived>& z, const Grid<Scalar>& g) {
  detail::check_size(z, g);
  Field<Scalar> d(2, g.nodes());
  d.col(0).setZero();
  const int n = g.intervals;
  d.rightCols(n) = (z.rightCols(n) - z.leftCols(n)) / g.dxi;
  return d;
}

/// Quadrature-weighted L2 inner product.
template <typename Scalar, typename DA, typename DB>
Scalar inner(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b, const Grid<Scalar>& g) {
  return (a.cwiseProduct(b).colwise().sum() * g.weights)(0);
}

template <typename Scalar, typename Derived>
Scalar l2_norm(const Eigen::MatrixBase<Derived>& z, const Grid<Scalar>& g) {
  using std::sqrt;
  return sqrt(inner(z, z, g));
}

/// Index of component `axle` at free node `node` (node >= 1) in the reduced vector.
inline int free_index(int node, int axle) { return 2 * (node - 1) + axle; }

/// Matrix of the discrete transport-plus-nonlocal operator
///   (A zeta)(xi) = -Lambda dzeta/dxi + (K3 zeta)
/// acting on the free nodes 1..N (the inflow value is eliminated as zero).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> assemble_discrete_A(const KernelSet<Scalar>& k,
                                                                          const Grid<Scalar>& g,
                                                                          const ModelMatrices<Scalar>& M) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = g.intervals;
  Matrix A = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i) {
    const Scalar c = M.Lambda(i, i) / g.dxi;
    for (int node = 1; node <= n; ++node) {
      const int r = free_index(node, i);
      A(r, r) -= c;
      if (node > 1) A(r, free_index(node - 1, i)) += c;
      for (int j = 1; j <= n; ++j) A(r, free_index(j, i)) += g.weights(j) * k.K3(i, j);
      A(r, free_index(n, i)) += k.K4(i);
    }
  }
  return A;
}

/// Adds theta * Sigma(y) [zeta + (K2 zeta)] to an assembled operator.
template <typename Scalar>
void add_friction_source(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A, const Vec2<Scalar>& sigma_diag,
                         Scalar theta, const KernelSet<Scalar>& k, const Grid<Scalar>& g) {
  const int n = g.intervals;
  for (int i = 0; i < 2; ++i) {
    const Scalar s = theta * sigma_diag(i);
    for (int node = 1; node <= n; ++node) {
      const int r = free_index(node, i);
      A(r, r) += s;
      for (int j = 1; j <= n; ++j) A(r, free_index(j, i)) += s * g.weights(j) * k.K2(i, j);
    }
  }
}

/// Reduced vector of free-node values (drops the pinned inflow column).
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_free(const Eigen::MatrixBase<Derived>& z) {
  const int n = static_cast<int>(z.cols()) - 1;
  Field<Scalar> tail = z.rightCols(n);
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(tail.data(), 2 * n);
}

template <typename Scalar, typename Derived>
Field<Scalar> from_free(const Eigen::MatrixBase<Derived>& v) {
  const int n = static_cast<int>(v.size()) / 2;
  Field<Scalar> z = Field<Scalar>::Zero(2, n + 1);
  z.rightCols(n) = Eigen::Map<const Field<Scalar>>(v.derived().data(), 2, n);
  return z;
}

/// Diagonal of the quadrature weights on the free nodes, repeated per axle.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> free_weights(const Grid<Scalar>& g) {
  const int n = g.intervals;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(2 * n);
  for (int node = 1; node <= n; ++node) w.template segment<2>(2 * (node - 1)).setConstant(g.weights(node));
  return w;
}

/// Everything needed to evaluate the semidiscrete model.
template <typename Scalar>
struct Model {
  VehicleBodyParams<Scalar> body;
  std::array<AxleTireParams<Scalar>, 2> axles;
  ModelMatrices<Scalar> mats;
  Grid<Scalar> grid;
  KernelSet<Scalar> kernels;
};

template <typename Scalar>
Model<Scalar> make_model(const VehicleBodyParams<Scalar>& body, const std::array<AxleTireParams<Scalar>, 2>& axles,
                         int intervals) {
  Model<Scalar> m;
  m.body = body;
  m.axles = axles;
  m.mats = build_matrices(body, axles);
  m.grid = make_grid<Scalar>(intervals);
  m.kernels = make_kernels(body, axles, m.grid);
  return m;
}

inline Model<double> reference_model(int intervals = 50) {
  return make_model(reference_body(), reference_axles(), intervals);
}


/// Dissipativity constant of an assembled operator on the free nodes:
///   -lambda_max of the symmetric part of W^{1/2} Q A W^{-1/2},
/// so that <A zeta, Q zeta>_h <= -omega |zeta|_h^2 for every free-node field.
/// For the upwind operator this includes the scheme's numerical dissipation.
template <typename Scalar>
Scalar dissipativity_constant(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                              const KernelSet<Scalar>& k, const Grid<Scalar>& g) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vector w = free_weights(g);
  const Vector q = to_free<Scalar>(k.Q);
  const Vector sw = w.cwiseSqrt();
  const Matrix B = (sw.cwiseProduct(q)).asDiagonal() * A * sw.cwiseInverse().asDiagonal();
  const Matrix S = Scalar(0.5) * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return -es.eigenvalues().maxCoeff();
}

/// Quadrature of the integrated-by-parts form
///   <A zeta, Q zeta> = -1/2 Lambda Q(1) zeta(1)^2 + 1/2 int Lambda Q' zeta^2 + int (Q zeta)^T (K3 zeta)
/// returned as the symmetric free-node matrix (unweighted).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dissipation_form(const Model<Scalar>& m) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto& g = m.grid;
  const auto& k = m.kernels;
  const int n = g.intervals;
  Matrix F = Matrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i) {
    const auto& ax = m.axles[i];
    const Scalar lam = m.mats.Lambda(i, i);
    const Scalar qscale = ax.Fz * ax.sigma / (Scalar(2) * ax.phi);
    for (int a = 1; a <= n; ++a) {
      const int r = free_index(a, i);
      F(r, r) += Scalar(0.5) * lam * qscale * pressure_slope(ax, g.xi(a)) * g.weights(a);
      for (int b = 1; b <= n; ++b) {
        Scalar k3 = g.weights(b) * k.K3(i, b);
        if (b == n) k3 += k.K4(i);
        const Scalar c = Scalar(0.5) * g.weights(a) * k.Q(i, a) * k3;
        F(r, free_index(b, i)) += c;
        F(free_index(b, i), r) += c;
      }
    }
    const int last = free_index(n, i);
    F(last, last) -= Scalar(0.5) * lam * k.Q(i, n);
  }
  return F;
}

/// Strict-dissipativity constant of the transport-plus-nonlocal operator, from the
/// quadrature of its integrated-by-parts form. It converges under refinement and is
/// a lower bound for the upwind constant above.
template <typename Scalar>
Scalar dissipativity_constant(const Model<Scalar>& m) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto isw = free_weights(m.grid).cwiseSqrt().cwiseInverse().eval();
  const Matrix S = isw.asDiagonal() * dissipation_form(m) * isw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return -es.eigenvalues().maxCoeff();
}

/// The same constant measured on the assembled upwind operator.
template <typename Scalar>
Scalar upwind_dissipativity_constant(const Model<Scalar>& m) {
  return dissipativity_constant(assemble_discrete_A(m.kernels, m.grid, m.mats), m.kernels, m.grid);
}

}  // namespace semitrack
