#pragma once

#include "semitrack/equilibrium.hpp"

namespace semitrack {

struct ObserverState {
  Vec2d X_hat = Vec2d::Zero();
  FieldD z_hat;
};

struct ObserverRates {
  Vec2d dX = Vec2d::Zero();
  FieldD dz;
};

/// Output-injection gain L1 = -(A1 + p I) A2^{-1}. Throws SolverError unless
/// A1 + L1 H A2 is Hurwitz.
Mat2d gain_l1(double p, const ModelMatrices<double>& mats);

/// A1 + L1 H A2, the lumped observer-error matrix.
Mat2d observer_error_matrix(const Mat2d& L1, const ModelMatrices<double>& mats);

/// Cascaded observer right-hand side. The distributed estimate is driven only by
/// the measurement Y; the lumped estimate uses output injection through L1.
ObserverRates observer_rhs(const ObserverState& o, const Vec2d& Y, const Vec2d& U, const ModelD& model,
                           const Mat2d& L1);

}  // namespace semitrack
