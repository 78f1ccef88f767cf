#include "semitrack/observer.hpp"

#include <sstream>

namespace semitrack {

Mat2d observer_error_matrix(const Mat2d& L1, const ModelMatrices<double>& mats) {
  return mats.A1 + L1 * mats.H * mats.A2;
}

Mat2d gain_l1(double p, const ModelMatrices<double>& mats) {
  Eigen::FullPivLU<Mat2d> lu(mats.A2);
  if (!lu.isInvertible()) throw ParameterError("A2 is singular; observer gain undefined");
  const Mat2d L1 = -(mats.A1 + p * Mat2d::Identity()) * lu.inverse();

  const auto eig = observer_error_matrix(L1, mats).eigenvalues();
  const double margin = eig.real().maxCoeff();
  if (!(margin < 0)) {
    std::ostringstream msg;
    msg << "observer error matrix is not Hurwitz for p = " << p << " (max Re eig = " << margin << ")";
    throw SolverError(msg.str());
  }
  return L1;
}

ObserverRates observer_rhs(const ObserverState& o, const Vec2d& Y, const Vec2d& U, const ModelD& model,
                           const Mat2d& L1) {
  const auto& mats = model.mats;
  const Vec2d Y_hat = measure(o.X_hat, U, mats).Y;
  ObserverRates r;
  r.dX = ode_rhs(o.X_hat, o.z_hat, model) - L1 * (Y - Y_hat);
  const Vec2d v_measured = mats.H.diagonal().cwiseInverse().cwiseProduct(Y);
  r.dz = transport_rhs(o.z_hat, v_measured, Y, model);
  return r;
}

}  // namespace semitrack
