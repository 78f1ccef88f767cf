#pragma once

#include <array>
#include <stdexcept>

#include <Eigen/Dense>

#include "semitrack/plant.hpp"

namespace semitrack {

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;
using FieldD = Field<double>;
using ModelD = Model<double>;

/// Raised when a linear or nonlinear solve cannot produce a trustworthy answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete A_Sigma(y) = A + theta Sigma(y)(I + K2) on the free nodes, factorized once.
class ASigmaOperator {
 public:
  ASigmaOperator(const ModelD& model, const Vec2d& y);

  /// Solves A_Sigma(y) w = rhs with w(0) = 0. The inflow column of rhs is ignored.
  FieldD solve(const FieldD& rhs) const;

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double rcond() const { return rcond_; }

 private:
  int intervals_ = 0;
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0;
};

FieldD invert_a_sigma(const Vec2d& y, const FieldD& rhs, const ModelD& model);

/// Steady-state velocity-to-force gain Psi(y) = -(K1 A_Sigma^{-1}(y) H).
Mat2d psi_matrix(const Vec2d& y, const ModelD& model);

/// Matrix-valued profile M(xi) stored column by column; column j is a field.
struct MatrixProfile {
  std::array<FieldD, 2> columns;

  Mat2d at(int node) const {
    Mat2d out;
    out.col(0) = columns[0].col(node);
    out.col(1) = columns[1].col(node);
    return out;
  }
  /// M(.) c as a field.
  FieldD times(const Vec2d& c) const { return columns[0] * c(0) + columns[1] * c(1); }
};

/// M(xi, v*) = -(A_Sigma^{-1}(v*) H)(xi) Psi^{-1}(v*), normalized so (K1 M) = I.
MatrixProfile m_profile(const Vec2d& v_star, const ModelD& model);
MatrixProfile m_profile(const ASigmaOperator& op, const Mat2d& psi_inverse, const ModelD& model);

/// K1 applied column-wise to a matrix profile.
Mat2d k1_of_profile(const MatrixProfile& M, const ModelD& model);

struct EquilibriumTarget {
  enum class Kind { lumped_state, steering };
  Kind kind = Kind::lumped_state;
  Vec2d value = Vec2d::Zero();

  static EquilibriumTarget lumped(const Vec2d& X) { return {Kind::lumped_state, X}; }
  static EquilibriumTarget steering(const Vec2d& U) { return {Kind::steering, U}; }
};

struct EquilibriumPoint {
  Vec2d X_star = Vec2d::Zero();
  FieldD z_star;
  Vec2d U_star = Vec2d::Zero();
  Vec2d v_star = Vec2d::Zero();
  Vec2d forces = Vec2d::Zero();
  double residual = 0;  // relative max-norm of the semidiscrete right-hand side
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
  int max_halvings = 40;
};

EquilibriumPoint solve_equilibrium(const EquilibriumTarget& target, const ModelD& model,
                                   const NewtonOptions& options = {});

/// Relative residual of the full semidiscrete right-hand side at (X, z, U).
double rhs_residual(const Vec2d& X, const FieldD& z, const Vec2d& U, const ModelD& model);

}  // namespace semitrack
