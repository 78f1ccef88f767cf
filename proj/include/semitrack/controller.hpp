#pragma once

#include "semitrack/equilibrium.hpp"

namespace semitrack {

/// Backstepping gains and everything precomputed at the target equilibrium.
struct ControllerGains {
  double q = 2;        // ODE-step decay rate [1/s]
  double gamma1 = 0;   // coupling weight between the lumped and distributed Lyapunov terms
  double omega_h = 0;  // discrete dissipativity constant used in gamma1
  double mq_inf = 0;   // max over nodes of |M^T(xi) Q(xi)|
  Mat2d A1_star;       // A1 + q I
  Mat2d G1_inv, G2_inv, psi_inv;
  EquilibriumPoint eq;
  MatrixProfile M;
};

struct ControlCommand {
  Vec2d U = Vec2d::Zero();
  Vec2d U_delta = Vec2d::Zero();
};

/// gamma1 = (q / omega) |G1^{-1} A1*|^2 |M^T Q|_inf^2.
double coupling_gain(double q, double omega, const Mat2d& G1_inv_A1_star, double mq_inf);

/// max_k |M^T(xi_k) Q(xi_k)| (spectral norm per node).
double mq_infinity_norm(const MatrixProfile& M, const KernelSet<double>& kernels);

ControllerGains synthesize_controller(const ModelD& model, const EquilibriumPoint& eq, double q);

/// Virtual law varpi(X_delta) = -G1^{-1} A1* X_delta.
Vec2d virtual_law(const Vec2d& X_delta, const ControllerGains& gains);

/// d varpi / dt along the lumped dynamics: -G1^{-1} A1* [G1 Z - q X_delta].
Vec2d virtual_law_rate(const Vec2d& X_delta, const Vec2d& Z, const ControllerGains& gains, const ModelD& model);

/// zeta = z_delta - M varpi(X_delta).
FieldD transformed_state(const FieldD& z_delta, const Vec2d& X_delta, const ControllerGains& gains);

/// Z = (K1 z_delta) - varpi(X_delta).
Vec2d z_functional(const FieldD& z_delta, const Vec2d& X_delta, const ControllerGains& gains, const ModelD& model);

/// Z_M = int M^T Q zeta.
Vec2d zm_functional(const FieldD& zeta, const ControllerGains& gains, const ModelD& model);

ControlCommand state_feedback(const Vec2d& X, const FieldD& z, const ControllerGains& gains, const ModelD& model);

/// Same law evaluated on the observer estimates.
ControlCommand output_feedback(const Vec2d& X_hat, const FieldD& z_hat, const ControllerGains& gains,
                               const ModelD& model);

}  // namespace semitrack
