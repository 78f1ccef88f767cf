#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace semitrack {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

/// Thrown when physical parameters violate their invariants.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tire/contact-patch parameters of one axle.
template <typename Scalar>
struct AxleTireParams {
  Scalar L = Scalar(0.1);       // contact patch length [m]
  Scalar sigma = Scalar(250);   // normalized micro-stiffness [1/m]
  Scalar phi = Scalar(1);       // carcass flexibility split, phi + psi = 1
  Scalar psi = Scalar(0);
  Scalar a = Scalar(0.1);       // exponential pressure decay rate
  Scalar Fz = Scalar(3000);     // vertical load [N]
  // Friction coefficient as a function of the relative velocity, bounded below
  // by mu_min. Defaults to the constant 1.
  std::function<Scalar(Scalar)> mu = [](Scalar) { return Scalar(1); };
  Scalar mu_min = Scalar(1);
};

/// Rigid-body and global model parameters.
template <typename Scalar>
struct VehicleBodyParams {
  Scalar m = Scalar(1300);
  Scalar Iz = Scalar(2000);
  Scalar l1 = Scalar(1.4);
  Scalar l2 = Scalar(1.0);
  Scalar vx = Scalar(50);
  Scalar Fw = Scalar(0);
  Scalar lw = Scalar(0);
  Scalar theta = Scalar(1);
  Scalar eps = Scalar(0);
};

/// Constant matrices of the state-space form plus the disturbance vector.
template <typename Scalar>
struct ModelMatrices {
  Mat2<Scalar> A1, A2, G1, G2, H, Lambda;
  Vec2<Scalar> b;
};

template <typename Scalar>
void validate(const VehicleBodyParams<Scalar>& body) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(std::string("invalid vehicle parameter: ") + what);
  };
  require(body.m > 0, "m must be positive");
  require(body.Iz > 0, "Iz must be positive");
  require(body.l1 > 0, "l1 must be positive");
  require(body.l2 > 0, "l2 must be positive");
  require(body.vx > 0, "vx must be positive");
  require(body.theta >= 0, "theta must be non-negative");
  require(body.eps >= 0, "eps must be non-negative");
}

template <typename Scalar>
void validate(const AxleTireParams<Scalar>& axle) {
  using std::abs;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ParameterError(std::string("invalid axle parameter: ") + what);
  };
  require(axle.L > 0, "L must be positive");
  require(axle.sigma > 0, "sigma must be positive");
  require(axle.Fz > 0, "Fz must be positive");
  require(axle.a > 0, "a must be positive");
  require(axle.mu_min > 0, "mu_min must be positive");
  require(static_cast<bool>(axle.mu), "mu must be callable");
  require(axle.phi > 0 && axle.phi <= 1, "phi must lie in (0, 1]");
  require(axle.psi >= 0 && axle.psi < 1, "psi must lie in [0, 1)");
  require(abs(axle.phi + axle.psi - Scalar(1)) <= Scalar(1e-12), "phi + psi must equal 1");
}

template <typename Scalar>
ModelMatrices<Scalar> build_matrices(const VehicleBodyParams<Scalar>& body,
                                     const std::array<AxleTireParams<Scalar>, 2>& axles) {
  validate(body);
  for (const auto& ax : axles) validate(ax);

  ModelMatrices<Scalar> M;
  M.A1 << Scalar(0), -body.vx, Scalar(0), Scalar(0);
  M.A2 << Scalar(1), body.l1, Scalar(1), -body.l2;
  M.G1 << -Scalar(1) / body.m, -Scalar(1) / body.m, -body.l1 / body.Iz, body.l2 / body.Iz;
  M.G2 = -body.vx * Mat2<Scalar>::Identity();
  M.H = Mat2<Scalar>::Zero();
  M.Lambda = Mat2<Scalar>::Zero();
  for (int i = 0; i < 2; ++i) {
    M.H(i, i) = Scalar(2) * axles[i].phi;
    M.Lambda(i, i) = body.vx / axles[i].L;
  }
  M.b << body.Fw / body.m, body.lw * body.Fw / body.Iz;
  return M;
}

/// Normalization constant a / (1 - exp(-a)) so that the profile integrates to one.
template <typename Scalar>
Scalar pressure_peak(const AxleTireParams<Scalar>& axle) {
  using std::exp;
  return axle.a / (Scalar(1) - exp(-axle.a));
}

/// Nondimensional vertical pressure p(xi) = p0 exp(-a xi).
template <typename Scalar>
Scalar pressure_profile(const AxleTireParams<Scalar>& axle, Scalar xi) {
  using std::exp;
  return pressure_peak(axle) * exp(-axle.a * xi);
}

/// dp/dxi, evaluated analytically.
template <typename Scalar>
Scalar pressure_slope(const AxleTireParams<Scalar>& axle, Scalar xi) {
  return -axle.a * pressure_profile(axle, xi);
}

/// |v|_eps: sqrt(v^2 + eps) for eps > 0, exact absolute value otherwise.
template <typename Scalar>
Scalar regularized_abs(Scalar v, Scalar eps) {
  using std::abs;
  using std::sqrt;
  return eps > Scalar(0) ? sqrt(v * v + eps) : abs(v);
}

/// Diagonal entries of the friction source matrix Sigma(v).
template <typename Scalar>
Vec2<Scalar> sigma_diagonal(const Vec2<Scalar>& v, const std::array<AxleTireParams<Scalar>, 2>& axles,
                            Scalar eps) {
  Vec2<Scalar> d;
  for (int i = 0; i < 2; ++i) {
    d(i) = -axles[i].sigma * regularized_abs(v(i), eps) / axles[i].mu(v(i));
  }
  return d;
}

template <typename Scalar>
Mat2<Scalar> sigma_matrix(const Vec2<Scalar>& v, const std::array<AxleTireParams<Scalar>, 2>& axles,
                          Scalar eps) {
  return sigma_diagonal(v, axles, eps).asDiagonal();
}

/// Rigid relative velocities v = A2 X + G2 U at the two axles.
template <typename Scalar>
Vec2<Scalar> rel_velocity(const Vec2<Scalar>& X, const Vec2<Scalar>& U, const ModelMatrices<Scalar>& M) {
  return M.A2 * X + M.G2 * U;
}

/// Table 1 vehicle (vx = 50 m/s oversteer configuration with lateral wind).
inline VehicleBodyParams<double> reference_body() {
  VehicleBodyParams<double> b;
  b.m = 1300;
  b.Iz = 2000;
  b.l1 = 1.4;
  b.l2 = 1.0;
  b.vx = 50;
  b.Fw = -500;
  b.lw = -0.3;
  b.theta = 1;
  b.eps = 0;
  return b;
}

inline std::array<AxleTireParams<double>, 2> reference_axles() {
  AxleTireParams<double> front;
  front.L = 0.11;
  front.sigma = 240;
  front.phi = 0.92;
  front.psi = 0.08;
  front.a = 0.1;
  front.Fz = 2.66e3;
  AxleTireParams<double> rear = front;
  rear.L = 0.09;
  rear.sigma = 269;
  rear.Fz = 3.72e3;
  return {front, rear};
}

}  // namespace semitrack
