#pragma once

#include <Eigen/Dense>
#include <vector>

#include "overloadx/fluid.hpp"
#include "overloadx/ftsp.hpp"

namespace overloadx {

/// Sign used when combining the pool-2 service capacities into psi(x).
///  - printed_sum: mu22 (m2 - z12) + mu12 z12
///  - sec10_difference: mu22 (m2 - z12) - mu12 z12 (reproduces psi(x*) = 0.62)
enum class PsiConvention { printed_sum, sec10_difference };

const char* to_string(PsiConvention c);
PsiConvention parse_psi_convention(std::string_view text);

double psi(const ModelParams& p, const FluidState& x, PsiConvention c);

/// Cumulative time-change functions tabulated on the fluid grid.
struct TimeChanges {
  std::vector<double> t;
  std::vector<double> gamma1;
  std::vector<double> phi12;
  std::vector<double> phi22;
  std::vector<double> gamma12;
  std::vector<double> gamma22;
  std::vector<double> gamma2;
  std::vector<double> gamma3;
  std::vector<double> psi;    ///< psi(x(t)) under the selected convention
  std::vector<double> sigma2; ///< sigma2(x(t)); 0 off the manifold
  Sigma2Method method = Sigma2Method::poisson_numeric;
  PsiConvention psi_convention = PsiConvention::printed_sum;
};

struct DiffusionOptions {
  Sigma2Method method = Sigma2Method::poisson_numeric;
  PsiConvention psi_convention = PsiConvention::printed_sum;
  MonteCarloSettings mc{};
  double sigma2_cache_tol = 1e-4;  ///< reuse sigma2 while x moves less than this
};

/// Trapezoidal integrals of the seven integrands. sigma2 is taken as 0 on
/// steps where the indicator is frozen (pi in {0, 1}).
TimeChanges time_changes(const ModelParams& p, const FluidPath& path,
                         const DiffusionOptions& options);

struct XiConstants {
  double xi1 = 0.0;
  double xi12 = 0.0;
  double xi22 = 0.0;
  double eta12 = 0.0;
  double eta22 = 0.0;
  double xi2 = 0.0;
  double xi3 = 0.0;
  double xi4 = 0.0;
  double xi5 = 0.0;
};

/// Bivariate OU limit of (q_s hat, z12 hat) at the stationary fluid point.
struct BouModel {
  StationaryPoint xstar;
  double p1 = 0.5;
  double p2 = 0.5;
  double psi = 0.0;
  double sigma2 = 0.0;
  XiConstants xi;
  Eigen::Matrix2d M;      ///< drift as printed for the covariance formulas
  Eigen::Matrix2d S;      ///< diagonal diffusion coefficients
  Eigen::Matrix2d V;      ///< S S^T
  Eigen::Matrix2d A_sde;  ///< drift of the integral equation frozen at x*
  Sigma2Method method = Sigma2Method::poisson_numeric;
  PsiConvention psi_convention = PsiConvention::printed_sum;
};

/// Throws std::domain_error unless 0 < z* < m2.
BouModel bou_matrices(const ModelParams& p, const DiffusionOptions& options);

struct SteadyStateCov {
  double Q1 = 0.0;  ///< S11^2 / 2|M11|
  double Q2 = 0.0;  ///< M12 covQZ / |M11|
  double varQs = 0.0;
  double Z1 = 0.0;  ///< xi4 / 2|M22|
  double Z2 = 0.0;  ///< xi2 / 2|M22|
  double varZ = 0.0;
  double covQZ = 0.0;
  double std_qs = 0.0;
  double std_q1 = 0.0;
  double std_q2 = 0.0;

  Eigen::Matrix2d matrix() const;
};

/// Closed forms, evaluated in the order varZ, covQZ, varQs.
SteadyStateCov steady_state_covariance(const BouModel& model);

/// Solves M S + S M^T = -V through the 4x4 Kronecker system. Throws
/// std::domain_error if M has an eigenvalue with nonnegative real part.
Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& M, const Eigen::Matrix2d& V);

/// Drift and variance rate of (q_s hat, z12 hat) along the fluid path.
struct LinearNoise {
  Eigen::Matrix2d A;
  Eigen::Matrix2d V;
};

LinearNoise linear_noise(const ModelParams& p, const FluidState& x, double pi, double sigma2,
                         PsiConvention c);

struct TransientCovariance {
  std::vector<double> t;
  std::vector<Eigen::Matrix2d> sigma;
};

/// RK4 on dS/dt = A S + S A^T + V over [0, T] on the path grid. Throws if
/// Sigma0 is not symmetric PSD or T exceeds the path.
TransientCovariance transient_covariance(const ModelParams& p, const FluidPath& path,
                                         const Eigen::Matrix2d& sigma0, double T,
                                         const DiffusionOptions& options);

struct OuParams {
  double nu = 0.0;
  double eta1 = 0.0;  ///< lambda1 + lambda2 - m1 mu11 - m2 nu
  double eta2 = 0.0;  ///< p1 theta1 + p2 theta2
  std::vector<double> t;
  std::vector<double> gamma1;  ///< time change of the q_s hat noise
  std::vector<double> gamma2;  ///< time change of the z12 hat noise
};

/// Decoupled one-dimensional limits when mu12 = mu22. Throws
/// std::invalid_argument otherwise.
OuParams pool_dependent_reduction(const ModelParams& p, const FluidPath& path,
                                  const DiffusionOptions& options);

struct GaussianApprox {
  int n = 0;
  double mean_q1 = 0.0;
  double mean_q2 = 0.0;
  double mean_z12 = 0.0;
  double mean_q1_scaled = 0.0;  ///< fluid point of the unscaled parameters
  double mean_q2_scaled = 0.0;
  double std_qs = 0.0;
  double std_q1 = 0.0;
  double std_q2 = 0.0;
  double std_z12 = 0.0;
  double std_hat_qs = 0.0;
  double std_hat_q1 = 0.0;
  double std_hat_q2 = 0.0;
};

/// Means n x* and standard deviations sqrt(n) from the steady-state
/// covariance, both at the effective threshold k^n / n of system n.
GaussianApprox gaussian_queue_approx(const ScaledSystem& sys, const DiffusionOptions& options);
GaussianApprox gaussian_queue_approx(const ModelParams& p, int n,
                                     const DiffusionOptions& options);

}  // namespace overloadx
