#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semitrack/controller.hpp"
#include "semitrack/observer.hpp"

namespace semitrack {

/// sqrt(|X|^2 + |z|_{L2}^2).
double state_norm(const Vec2d& X, const FieldD& z, const Grid<double>& g);

double lyapunov_v1(const Vec2d& X_delta);

/// 1/2 int zeta^T Q zeta.
double lyapunov_v2(const FieldD& zeta, const Grid<double>& g, const KernelSet<double>& k);

/// Solves A^T P + P A = -I for a Hurwitz 2x2 A.
Mat2d solve_lyapunov(const Mat2d& A);

/// Observer-error functional 1/2 Xt^T P Xt + (w/2) int zt^T Q zt.
struct ObserverLyapunov {
  Mat2d P = Mat2d::Identity();
  double z_weight = 0;
  double rho = 0;  // decay-rate stand-in 1 / lambda_max(P)
};

ObserverLyapunov make_observer_lyapunov(const Mat2d& L1, const ModelD& model, double omega_h);
double lyapunov_v0(const Vec2d& X_tilde, const FieldD& z_tilde, const ObserverLyapunov& w, const ModelD& model);

/// gamma0 = 2 eps / (rho gamma1) with eps = omega_h / |M^T Q|_inf^2.
double composite_gamma0(const ControllerGains& gains, const ObserverLyapunov& w);

/// V1 + V2 / gamma1 (+ gamma0 V0 when gamma0 > 0).
double composite_v(const Vec2d& X_delta, const FieldD& zeta, const ControllerGains& gains, const ModelD& model,
                   double gamma0 = 0, double v0 = 0);

struct PassivityTrial {
  double supplied = 0;      // int F^T v dt
  double storage_gain = 0;  // V(t) - V(0)
  double dissipated = 0;    // omega int |z|^2 dt
  double residual = 0;      // (supplied - storage_gain - dissipated) / scale
};

/// One randomized open-loop trajectory of the PDE subsystem driven by a smooth input.
PassivityTrial passivity_trial(const ModelD& model, double omega_h, std::uint64_t seed, double t_end = 0.5,
                               double dt = 5e-5);

struct CertifyOptions {
  int trials = 100;
  std::uint64_t seed = 7;
  double trial_t_end = 0.5;
  double trial_dt = 5e-5;
  double passivity_constant = 1.0;  // C in the tolerance -C (dt + dxi)
  double lemma1_tolerance = 1e-3;
  double equilibrium_tolerance = 1e-8;
  double observer_gain = 2;
  double controller_gain = 2;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CertificationReport {
  int intervals = 0;
  double omega_h = 0;
  double omega_h_upwind = 0;  // same form on the assembled upwind operator, for comparison
  double passivity_residual_min = 0;
  double passivity_tolerance = 0;
  int passivity_trials = 0;
  double lemma1_norm_error = 0;
  double lemma1_continuum_gap = 0;
  double equilibrium_residual = 0;
  std::vector<double> hurwitz_margins;  // real parts of eig(A1 + L1 H A2)
  double lipschitz_sigma = 0;           // |d Sigma / d y| bound, sampled
  double gamma1 = 0;
  double observer_rho = 0;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
};

CertificationReport certify(const ModelD& model, const CertifyOptions& options = {});

/// Lemma-1 normalization of a profile evaluated against an independent continuum
/// solution of the nonlocal matrix ODE (decoupled axles, closed form per column).
double lemma1_continuum_gap(const ModelD& model, const Vec2d& v_star);

}  // namespace semitrack
