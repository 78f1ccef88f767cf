#include "semitrack/controller.hpp"

namespace semitrack {

double coupling_gain(double q, double omega, const Mat2d& G1_inv_A1_star, double mq_inf) {
  const double g = G1_inv_A1_star.operatorNorm();
  return q / omega * g * g * mq_inf * mq_inf;
}

double mq_infinity_norm(const MatrixProfile& M, const KernelSet<double>& kernels) {
  double best = 0;
  for (int k = 0; k < kernels.Q.cols(); ++k) {
    const Mat2d mq = M.at(k).transpose() * kernels.Q.col(k).asDiagonal();
    best = std::max(best, mq.operatorNorm());
  }
  return best;
}

ControllerGains synthesize_controller(const ModelD& model, const EquilibriumPoint& eq, double q) {
  if (!(q > 0)) throw ParameterError("controller gain q must be positive");
  const auto& mats = model.mats;

  ControllerGains g;
  g.q = q;
  g.eq = eq;
  g.A1_star = mats.A1 + q * Mat2d::Identity();
  g.G1_inv = mats.G1.inverse();
  g.G2_inv = mats.G2.inverse();

  const ASigmaOperator op(model, eq.v_star);
  const Mat2d psi = psi_matrix(eq.v_star, model);
  g.psi_inv = psi.inverse();
  g.M = m_profile(op, g.psi_inv, model);

  g.omega_h = dissipativity_constant(model);
  if (!(g.omega_h > 0)) throw SolverError("discrete dissipativity constant is not positive");
  g.mq_inf = mq_infinity_norm(g.M, model.kernels);
  g.gamma1 = coupling_gain(q, g.omega_h, g.G1_inv * g.A1_star, g.mq_inf);
  return g;
}

Vec2d virtual_law(const Vec2d& X_delta, const ControllerGains& gains) {
  return -gains.G1_inv * (gains.A1_star * X_delta);
}

Vec2d virtual_law_rate(const Vec2d& X_delta, const Vec2d& Z, const ControllerGains& gains, const ModelD& model) {
  return -gains.G1_inv * (gains.A1_star * (model.mats.G1 * Z - gains.q * X_delta));
}

FieldD transformed_state(const FieldD& z_delta, const Vec2d& X_delta, const ControllerGains& gains) {
  return z_delta - gains.M.times(virtual_law(X_delta, gains));
}

Vec2d z_functional(const FieldD& z_delta, const Vec2d& X_delta, const ControllerGains& gains,
                   const ModelD& model) {
  return k1_functional(z_delta, model.kernels, model.grid) - virtual_law(X_delta, gains);
}

Vec2d zm_functional(const FieldD& zeta, const ControllerGains& gains, const ModelD& model) {
  const FieldD qz = model.kernels.Q.cwiseProduct(zeta);
  Vec2d out;
  for (int j = 0; j < 2; ++j) out(j) = inner(gains.M.columns[j], qz, model.grid);
  return out;
}

ControlCommand state_feedback(const Vec2d& X, const FieldD& z, const ControllerGains& gains, const ModelD& model) {
  const auto& mats = model.mats;
  const Vec2d Xd = X - gains.eq.X_star;
  const FieldD zd = z - gains.eq.z_star;
  const Vec2d varpi = virtual_law(Xd, gains);
  const Vec2d ZM = zm_functional(FieldD(zd - gains.M.times(varpi)), gains, model);

  const Mat2d coupling = gains.G1_inv * gains.A1_star * mats.G1;
  ControlCommand cmd;
  cmd.U_delta = -gains.G2_inv * (coupling.transpose() * ZM + gains.gamma1 * mats.G1.transpose() * Xd) -
                gains.G2_inv * (mats.A2 * Xd - gains.psi_inv * varpi);
  cmd.U = gains.eq.U_star + cmd.U_delta;
  return cmd;
}

ControlCommand output_feedback(const Vec2d& X_hat, const FieldD& z_hat, const ControllerGains& gains,
                               const ModelD& model) {
  return state_feedback(X_hat, z_hat, gains, model);
}

}  // namespace semitrack
