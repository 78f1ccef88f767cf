#include "semitrack/equilibrium.hpp"

#include <cmath>
#include <sstream>

namespace semitrack {

namespace {

constexpr double kMinRcond = 1e-14;
constexpr double kMaxPsiCondition = 1e12;

FieldD constant_field(const Vec2d& value, int nodes) {
  FieldD f(2, nodes);
  f.colwise() = value;
  return f;
}

}  // namespace

ASigmaOperator::ASigmaOperator(const ModelD& model, const Vec2d& y) : intervals_(model.grid.intervals) {
  matrix_ = assemble_discrete_A(model.kernels, model.grid, model.mats);
  add_friction_source(matrix_, sigma_diagonal(y, model.axles, model.body.eps), model.body.theta, model.kernels,
                      model.grid);
  lu_.compute(matrix_);
  rcond_ = lu_.rcond();
  if (!(rcond_ > kMinRcond)) {
    std::ostringstream msg;
    msg << "discrete A_Sigma(y) is singular (rcond = " << rcond_ << ") at y = [" << y(0) << ", " << y(1)
        << "]; the dissipativity assumptions fail for these parameters";
    throw SolverError(msg.str());
  }
}

FieldD ASigmaOperator::solve(const FieldD& rhs) const {
  if (rhs.cols() != intervals_ + 1) throw std::invalid_argument("rhs size does not match grid");
  const Eigen::VectorXd w = lu_.solve(to_free<double>(rhs));
  return from_free<double>(w);
}

FieldD invert_a_sigma(const Vec2d& y, const FieldD& rhs, const ModelD& model) {
  return ASigmaOperator(model, y).solve(rhs);
}

namespace {

Mat2d psi_from(const ASigmaOperator& op, const ModelD& model, std::array<FieldD, 2>* responses = nullptr) {
  Mat2d psi;
  for (int j = 0; j < 2; ++j) {
    const FieldD w = op.solve(constant_field(model.mats.H.col(j), model.grid.nodes()));
    psi.col(j) = -k1_functional(w, model.kernels, model.grid);
    if (responses) (*responses)[j] = w;
  }
  return psi;
}

void check_invertible(const Mat2d& psi) {
  Eigen::JacobiSVD<Mat2d> svd(psi);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(1);
  const double cond = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxPsiCondition)) {
    std::ostringstream msg;
    msg << "Psi(y) is numerically singular (condition number " << cond << ")";
    throw SolverError(msg.str());
  }
}

}  // namespace

Mat2d psi_matrix(const Vec2d& y, const ModelD& model) {
  const Mat2d psi = psi_from(ASigmaOperator(model, y), model);
  check_invertible(psi);
  return psi;
}

MatrixProfile m_profile(const ASigmaOperator& op, const Mat2d& psi_inverse, const ModelD& model) {
  std::array<FieldD, 2> w;
  psi_from(op, model, &w);
  // M = -[w0 w1] Psi^{-1}
  MatrixProfile M;
  for (int j = 0; j < 2; ++j) M.columns[j] = -(w[0] * psi_inverse(0, j) + w[1] * psi_inverse(1, j));
  return M;
}

MatrixProfile m_profile(const Vec2d& v_star, const ModelD& model) {
  const ASigmaOperator op(model, v_star);
  const Mat2d psi = psi_from(op, model);
  check_invertible(psi);
  return m_profile(op, psi.inverse(), model);
}

Mat2d k1_of_profile(const MatrixProfile& M, const ModelD& model) {
  Mat2d out;
  for (int j = 0; j < 2; ++j) out.col(j) = k1_functional(M.columns[j], model.kernels, model.grid);
  return out;
}

double rhs_residual(const Vec2d& X, const FieldD& z, const Vec2d& U, const ModelD& model) {
  const auto& M = model.mats;
  const Vec2d F = tire_forces(z, model.kernels, model.grid);
  const double ode_scale =
      std::max({(M.A1 * X).cwiseAbs().maxCoeff(), (M.G1 * F).cwiseAbs().maxCoeff(), M.b.cwiseAbs().maxCoeff()});
  const double ode_abs = ode_rhs(X, z, model).cwiseAbs().maxCoeff();

  const Vec2d v = rel_velocity(X, U, M);
  const double pde_scale = std::max((M.H * v).cwiseAbs().maxCoeff(),
                                    (M.Lambda.diagonal().asDiagonal() * upwind_derivative(z, model.grid))
                                        .cwiseAbs()
                                        .maxCoeff());
  const double pde_abs = pde_rhs(X, z, U, model).cwiseAbs().maxCoeff();

  auto rel = [](double value, double scale) { return scale > 0 ? value / scale : value; };
  return std::max(rel(ode_abs, ode_scale), rel(pde_abs, pde_scale));
}

EquilibriumPoint solve_equilibrium(const EquilibriumTarget& target, const ModelD& model,
                                   const NewtonOptions& options) {
  const auto& M = model.mats;
  const Mat2d A2inv = M.A2.inverse();

  auto lumped_for = [&](const Vec2d& v) -> Vec2d {
    if (target.kind == EquilibriumTarget::Kind::lumped_state) return target.value;
    return A2inv * (v - M.G2 * target.value);
  };
  // Stationarity of the lumped equation with (K1 z*) = Psi(v*) v*.
  auto residual = [&](const Vec2d& v) -> Vec2d {
    return M.G1 * (psi_matrix(v, model) * v) + M.A1 * lumped_for(v) + M.b;
  };

  Vec2d v = target.kind == EquilibriumTarget::Kind::lumped_state
                ? Vec2d(M.A2 * target.value)
                : Vec2d(M.G2 * target.value);
  Vec2d R = residual(v);
  int it = 0;
  for (; it < options.max_iterations && R.norm() > options.tolerance; ++it) {
    Mat2d J;
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(v(j)));
      Vec2d vp = v, vm = v;
      vp(j) += h;
      vm(j) -= h;
      J.col(j) = (residual(vp) - residual(vm)) / (2 * h);
    }
    Eigen::FullPivLU<Mat2d> lu(J);
    if (!lu.isInvertible()) throw SolverError("equilibrium Jacobian is singular");
    const Vec2d step = -lu.solve(R);

    double alpha = 1.0;
    Vec2d trial = v + step;
    Vec2d R_trial = residual(trial);
    for (int h = 0; h < options.max_halvings && !(R_trial.norm() < R.norm()); ++h) {
      alpha *= 0.5;
      trial = v + alpha * step;
      R_trial = residual(trial);
    }
    if (!(R_trial.norm() < R.norm())) break;  // stagnated; reported below
    v = trial;
    R = R_trial;
  }
  if (!(R.norm() <= options.tolerance)) {
    std::ostringstream msg;
    msg << "equilibrium Newton iteration did not converge after " << it << " iterations (|R| = " << R.norm()
        << ")";
    throw SolverError(msg.str());
  }

  EquilibriumPoint eq;
  eq.iterations = it;
  eq.v_star = v;
  eq.X_star = lumped_for(v);
  eq.U_star = target.kind == EquilibriumTarget::Kind::steering ? target.value
                                                               : Vec2d(M.G2.inverse() * (v - M.A2 * eq.X_star));
  eq.z_star = -invert_a_sigma(v, [&] {
    FieldD f(2, model.grid.nodes());
    f.colwise() = Vec2d(M.H * v);
    return f;
  }(), model);
  eq.forces = tire_forces(eq.z_star, model.kernels, model.grid);
  eq.residual = rhs_residual(eq.X_star, eq.z_star, eq.U_star, model);
  return eq;
}

}  // namespace semitrack
