#pragma once

#include "semitrack/spatial_field.hpp"

namespace semitrack {

template <typename Scalar>
struct PlantState {
  Vec2<Scalar> X = Vec2<Scalar>::Zero();  // [v_y, r]
  Field<Scalar> z;                        // bristle deflection, z(0) = 0
};

template <typename Scalar>
struct Measurement {
  Vec2<Scalar> Y = Vec2<Scalar>::Zero();
  Scalar t = Scalar(0);
};

template <typename Scalar, typename Derived>
Vec2<Scalar> tire_forces(const Eigen::MatrixBase<Derived>& z, const KernelSet<Scalar>& k, const Grid<Scalar>& g) {
  return k1_functional(z, k, g);
}

/// dX/dt = A1 X + G1 (K1 z) + b.
template <typename Scalar, typename Derived>
Vec2<Scalar> ode_rhs(const Vec2<Scalar>& X, const Eigen::MatrixBase<Derived>& z, const Model<Scalar>& m) {
  return m.mats.A1 * X + m.mats.G1 * tire_forces(z, m.kernels, m.grid) + m.mats.b;
}

/// Semidiscrete bristle dynamics driven by an arbitrary relative velocity `v`
/// (the Sigma argument) and an arbitrary forcing term.
///   dz/dt = -Lambda dz/dxi + theta Sigma(v_sigma)[z + K2 z] + K3 z + forcing
/// The inflow node derivative is zero so that z(0) = 0 is preserved.
template <typename Scalar, typename Derived>
Field<Scalar> transport_rhs(const Eigen::MatrixBase<Derived>& z, const Vec2<Scalar>& v_sigma,
                            const Vec2<Scalar>& forcing, const Model<Scalar>& m) {
  const auto& g = m.grid;
  const auto& k = m.kernels;
  const Vec2<Scalar> s = m.body.theta * sigma_diagonal(v_sigma, m.axles, m.body.eps);
  const Vec2<Scalar> nonlocal = s.cwiseProduct(k2_functional(z, k, g)) + k3_functional(z, k, g) + forcing;

  Field<Scalar> dz = -(m.mats.Lambda.diagonal().asDiagonal() * upwind_derivative(z, g));
  dz.noalias() += s.asDiagonal() * z;
  dz.colwise() += nonlocal;
  dz.col(0).setZero();
  return dz;
}

template <typename Scalar, typename Derived>
Field<Scalar> pde_rhs(const Vec2<Scalar>& X, const Eigen::MatrixBase<Derived>& z, const Vec2<Scalar>& U,
                      const Model<Scalar>& m) {
  const Vec2<Scalar> v = rel_velocity(X, U, m.mats);
  return transport_rhs(z, v, Vec2<Scalar>(m.mats.H * v), m);
}

/// Y = H (A2 X + G2 U).
template <typename Scalar>
Measurement<Scalar> measure(const Vec2<Scalar>& X, const Vec2<Scalar>& U, const ModelMatrices<Scalar>& M,
                            Scalar t = Scalar(0)) {
  return {M.H * rel_velocity(X, U, M), t};
}

template <typename Scalar>
PlantState<Scalar> zero_state(const Grid<Scalar>& g) {
  return {Vec2<Scalar>::Zero(), Field<Scalar>::Zero(2, g.nodes())};
}

}  // namespace semitrack
