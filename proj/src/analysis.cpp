#include "semitrack/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace semitrack {

double state_norm(const Vec2d& X, const FieldD& z, const Grid<double>& g) {
  return std::sqrt(X.squaredNorm() + inner(z, z, g));
}

double lyapunov_v1(const Vec2d& X_delta) { return 0.5 * X_delta.squaredNorm(); }

double lyapunov_v2(const FieldD& zeta, const Grid<double>& g, const KernelSet<double>& k) {
  return 0.5 * inner(zeta, FieldD(k.Q.cwiseProduct(zeta)), g);
}

Mat2d solve_lyapunov(const Mat2d& A) {
  // (I kron A^T + A^T kron I) vec(P) = -vec(I)
  Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
  const Mat2d At = A.transpose();
  for (int i = 0; i < 2; ++i) {
    K.block<2, 2>(2 * i, 2 * i) += At;
    for (int j = 0; j < 2; ++j) K.block<2, 2>(2 * i, 2 * j).diagonal().array() += At(i, j);
  }
  Eigen::Vector4d rhs;
  rhs << -1, 0, 0, -1;
  Eigen::FullPivLU<Eigen::Matrix4d> lu(K);
  if (!lu.isInvertible()) throw SolverError("Lyapunov equation is singular");
  const Eigen::Vector4d p = lu.solve(rhs);
  Mat2d P = Eigen::Map<const Mat2d>(p.data());
  return 0.5 * (P + P.transpose());
}

ObserverLyapunov make_observer_lyapunov(const Mat2d& L1, const ModelD& model, double omega_h) {
  ObserverLyapunov w;
  w.P = solve_lyapunov(observer_error_matrix(L1, model.mats));
  Eigen::SelfAdjointEigenSolver<Mat2d> es(w.P);
  w.rho = 1.0 / es.eigenvalues().maxCoeff();

  // |P G1 K1|^2 as an operator L2 -> R^2: K1 K1^* = diag(int K1_i^2).
  Vec2d gram = model.kernels.K1.cwiseAbs2() * model.grid.weights;
  const Mat2d PG = w.P * model.mats.G1;
  const Mat2d op = PG * gram.asDiagonal() * PG.transpose();
  Eigen::SelfAdjointEigenSolver<Mat2d> eo(op);
  w.z_weight = eo.eigenvalues().maxCoeff() / omega_h;
  return w;
}

double lyapunov_v0(const Vec2d& X_tilde, const FieldD& z_tilde, const ObserverLyapunov& w, const ModelD& model) {
  return 0.5 * X_tilde.dot(w.P * X_tilde) + w.z_weight * lyapunov_v2(z_tilde, model.grid, model.kernels);
}

double composite_gamma0(const ControllerGains& gains, const ObserverLyapunov& w) {
  const double eps = gains.omega_h / (gains.mq_inf * gains.mq_inf);
  return 2 * eps / (w.rho * gains.gamma1);
}

double composite_v(const Vec2d& X_delta, const FieldD& zeta, const ControllerGains& gains, const ModelD& model,
                   double gamma0, double v0) {
  return gamma0 * v0 + lyapunov_v1(X_delta) + lyapunov_v2(zeta, model.grid, model.kernels) / gains.gamma1;
}

PassivityTrial passivity_trial(const ModelD& model, double omega_h, std::uint64_t seed, double t_end, double dt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.2, 0.2), freq(0.5, 6.0), phase(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> zamp(-0.005, 0.005);

  std::array<double, 4> a{}, w{}, ph{};
  for (int i = 0; i < 4; ++i) {
    a[i] = amp(rng);
    w[i] = freq(rng);
    ph[i] = phase(rng);
  }
  auto input = [&](double t) {
    return Vec2d(a[0] * std::sin(w[0] * t + ph[0]) + a[1] * std::sin(w[1] * t + ph[1]),
                 a[2] * std::sin(w[2] * t + ph[2]) + a[3] * std::sin(w[3] * t + ph[3]));
  };

  const auto& g = model.grid;
  FieldD z(2, g.nodes());
  const Vec2d c1(zamp(rng), zamp(rng)), c2(zamp(rng), zamp(rng));
  for (int k = 0; k < g.nodes(); ++k) {
    const double s = g.xi(k);
    z.col(k) = c1 * s + c2 * std::sin(3.141592653589793 * s);
  }

  auto rhs = [&](const FieldD& zz, double t) {
    const Vec2d v = input(t);
    return transport_rhs(zz, v, Vec2d(model.mats.H * v), model);
  };
  auto power = [&](const FieldD& zz, double t) { return k1_functional(zz, model.kernels, g).dot(input(t)); };

  PassivityTrial out;
  const double v_start = lyapunov_v2(z, g, model.kernels);
  const int steps = static_cast<int>(std::lround(t_end / dt));
  double t = 0;
  double p_prev = power(z, t), n_prev = inner(z, z, g);
  for (int n = 0; n < steps; ++n) {
    const FieldD k1 = rhs(z, t);
    const FieldD k2 = rhs(FieldD(z + 0.5 * dt * k1), t + 0.5 * dt);
    const FieldD k3 = rhs(FieldD(z + 0.5 * dt * k2), t + 0.5 * dt);
    const FieldD k4 = rhs(FieldD(z + dt * k3), t + dt);
    z += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += dt;
    const double p_next = power(z, t), n_next = inner(z, z, g);
    out.supplied += 0.5 * dt * (p_prev + p_next);
    out.dissipated += 0.5 * dt * omega_h * (n_prev + n_next);
    p_prev = p_next;
    n_prev = n_next;
  }
  out.storage_gain = lyapunov_v2(z, g, model.kernels) - v_start;
  const double scale = std::abs(out.supplied) + std::abs(out.storage_gain) + out.dissipated;
  out.residual = scale > 0 ? (out.supplied - out.storage_gain - out.dissipated) / scale : 0.0;
  return out;
}

namespace {

// Composite Simpson on [0, 1].
template <typename F>
double simpson(F&& f, int n = 2000) {
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

}  // namespace

double lemma1_continuum_gap(const ModelD& model, const Vec2d& v_star) {
  const Mat2d psi = psi_matrix(v_star, model);
  const Mat2d rhs = model.mats.H * psi.inverse();
  const Vec2d s = model.body.theta * sigma_diagonal(v_star, model.axles, model.body.eps);

  Mat2d K1M = Mat2d::Zero();
  for (int i = 0; i < 2; ++i) {
    const auto& ax = model.axles[i];
    const double lam = model.mats.Lambda(i, i);
    const double alpha = s(i) / lam;
    // Column entries are c * gfun(xi) with gfun' = alpha gfun + 1 / lam, gfun(0) = 0.
    auto gfun = [&](double xi) {
      return std::abs(alpha) < 1e-14 ? xi / lam : std::expm1(alpha * xi) / (alpha * lam);
    };
    const double k2g = simpson([&](double xi) { return -ax.psi * pressure_profile(ax, xi) * gfun(xi); });
    const double k3g = simpson([&](double xi) {
                         return -model.body.vx * ax.psi / ax.L * pressure_slope(ax, xi) * gfun(xi);
                       }) +
                       model.body.vx * ax.psi / ax.L * pressure_profile(ax, 1.0) * gfun(1.0);
    const double k1g = simpson([&](double xi) { return ax.Fz * ax.sigma * pressure_profile(ax, xi) * gfun(xi); });
    const double denom = 1.0 - s(i) * k2g - k3g;
    for (int j = 0; j < 2; ++j) K1M(i, j) = k1g * rhs(i, j) / denom;
  }
  return (K1M - Mat2d::Identity()).norm();
}

bool CertificationReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

CertificationReport certify(const ModelD& model, const CertifyOptions& options) {
  CertificationReport r;
  r.intervals = model.grid.intervals;
  r.omega_h = dissipativity_constant(model);
  r.omega_h_upwind = upwind_dissipativity_constant(model);
  {
    std::ostringstream d;
    d << "omega_h = " << r.omega_h << " (upwind operator " << r.omega_h_upwind << ")";
    r.verdicts.push_back({"dissipativity", r.omega_h > 0, d.str()});
  }

  r.passivity_trials = options.trials;
  r.passivity_tolerance = options.passivity_constant * (options.trial_dt + model.grid.dxi);
  r.passivity_residual_min = std::numeric_limits<double>::infinity();
  std::mt19937_64 seeder(options.seed);
  for (int n = 0; n < options.trials; ++n) {
    const auto trial = passivity_trial(model, r.omega_h, seeder(), options.trial_t_end, options.trial_dt);
    r.passivity_residual_min = std::min(r.passivity_residual_min, trial.residual);
  }
  {
    std::ostringstream d;
    d << "min relative residual " << r.passivity_residual_min << " vs -" << r.passivity_tolerance;
    r.verdicts.push_back({"passivity", r.passivity_residual_min >= -r.passivity_tolerance, d.str()});
  }

  bool eq_ok = false;
  try {
    const auto eq = solve_equilibrium(EquilibriumTarget::lumped(Vec2d::Zero()), model);
    r.equilibrium_residual = eq.residual;
    const auto M = m_profile(eq.v_star, model);
    r.lemma1_norm_error = (k1_of_profile(M, model) - Mat2d::Identity()).norm();
    r.lemma1_continuum_gap = lemma1_continuum_gap(model, eq.v_star);
    const auto gains = synthesize_controller(model, eq, options.controller_gain);
    r.gamma1 = gains.gamma1;
    eq_ok = true;
  } catch (const std::exception& e) {
    r.verdicts.push_back({"equilibrium", false, e.what()});
  }
  if (eq_ok) {
    std::ostringstream d;
    d << "relative residual " << r.equilibrium_residual;
    r.verdicts.push_back({"equilibrium", r.equilibrium_residual < options.equilibrium_tolerance, d.str()});
    std::ostringstream l;
    l << "|K1 M - I| = " << r.lemma1_norm_error << ", continuum gap " << r.lemma1_continuum_gap;
    r.verdicts.push_back({"normalization", r.lemma1_norm_error <= options.lemma1_tolerance, l.str()});
  }

  try {
    const Mat2d L1 = gain_l1(options.observer_gain, model.mats);
    const auto eig = observer_error_matrix(L1, model.mats).eigenvalues();
    for (int i = 0; i < 2; ++i) r.hurwitz_margins.push_back(eig(i).real());
    if (r.omega_h > 0) r.observer_rho = make_observer_lyapunov(L1, model, r.omega_h).rho;
    std::ostringstream d;
    d << "max Re eig = " << eig.real().maxCoeff();
    r.verdicts.push_back({"observer_hurwitz", true, d.str()});
  } catch (const std::exception& e) {
    r.verdicts.push_back({"observer_hurwitz", false, e.what()});
  }

  // Sampled Lipschitz constant of y -> Sigma(y).
  std::mt19937_64 rng(options.seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    const Vec2d a(u(rng), u(rng)), b(u(rng), u(rng));
    const double dy = (a - b).norm();
    if (dy < 1e-9) continue;
    const Vec2d ds = sigma_diagonal(a, model.axles, model.body.eps) - sigma_diagonal(b, model.axles, model.body.eps);
    r.lipschitz_sigma = std::max(r.lipschitz_sigma, ds.cwiseAbs().maxCoeff() / dy);
  }
  {
    std::ostringstream d;
    d << "L_Sigma ~ " << r.lipschitz_sigma;
    r.verdicts.push_back({"sigma_lipschitz", std::isfinite(r.lipschitz_sigma), d.str()});
  }
  return r;
}

}  // namespace semitrack
