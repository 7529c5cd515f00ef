#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drbeta/core.hpp"

namespace drbeta::sim {

/// Continuous-time parameters of the dynamic realized beta spot process.
struct DRBetaParams {
  double omega1 = 0.7;
  double omega2 = -0.5;
  std::vector<double> gamma = {0.1};
  std::vector<double> alpha = {0.37};
  double nu = 1.5;
  double rho = -0.6;
  double beta_d = 1.5;

  int p() const { return static_cast<int>(gamma.size()); }
  int q() const { return static_cast<int>(alpha.size()); }
  void validate() const;
};

/// J^2 = max(mean + N(0, sd^2), floor); the sign of J is +/- with
/// probability 1/2.
struct JumpSizeParams {
  double mean = 0.0;
  double sd = 0.0;
  double floor = 0.0;
};

/// GARCH-Ito market volatility, residual volatility and jump intensities.
struct VolParams {
  double omega1_t = 3.02e-5;
  double omega2_t = 4.00e-6;
  double gamma_t = 0.35;
  double alpha_t = 0.4;
  double beta_t = 0.1;
  double nu_t = 1e-5;
  double rho_t = -0.424;
  double q_const = 0.012;
  double lambda1 = 4.0;
  double lambda2 = 5.0;
  JumpSizeParams jump1{2e-5, 2e-6, 4e-5};
  JumpSizeParams jump2{1e-5, 1e-6, 2e-5};

  void validate() const;
};

/// Noise eps_a = theta_a * chi_a with OU scale processes around a diurnal
/// mean s_a (1 + amp cos 2 pi t) and a Gaussian VAR(1) chi.
struct NoiseParams {
  double mean_rev = 10.0;
  double s1 = 3.440e-4;
  double s2 = 1.151e-3;
  double diurnal_amp = 0.1;
  /// Loadings of theta_2 on the market (B) and residual (W) Brownian motions.
  double theta2_load_b = 0.6;
  double theta2_load_w = 0.8;
  Eigen::Matrix2d ar_coeff = (Eigen::Matrix2d() << 0.8, 0.0, 0.0, 0.8).finished();
  Eigen::Matrix2d innov_cov = (Eigen::Matrix2d() << 0.360, 0.168, 0.168, 0.360).finished();

  void validate() const;
  static NoiseParams none();
};

struct InitialState {
  double beta0 = 2.16;
  double sigma2_0 = 3.12e-5;
  double x1_0 = 16.0;
  double x2_0 = 10.0;
};

struct SimOptions {
  /// Euler substeps per observation tick.
  int refinement = 1;
  /// Keep the spot-beta path on the tick grid.
  bool store_spot_beta = true;
};

struct SimCounters {
  long long jumps1 = 0;
  long long jumps2 = 0;
  long long theta_clamps = 0;
  long long sigma2_clamps = 0;
};

struct SimOutput {
  PricePanel latent;
  PricePanel observed;
  std::vector<double> spot_beta;   // tick grid, n_days*m+1
  std::vector<double> true_ibeta;  // per day
  std::vector<double> true_h;      // per day, h_i(theta_0)
  double next_h = 0.0;             // h_{n+1}(theta_0)
  std::vector<double> beta_close;  // beta at integer times 0..n
  std::uint64_t seed = 0;
  SimCounters counters;
};

/// Full jump-diffusion + noise simulation on grid.m ticks per day.
SimOutput simulate(const DRBetaParams& dr, const VolParams& vol,
                   const NoiseParams& noise, TimeGrid grid,
                   const InitialState& init, std::uint64_t seed,
                   const SimOptions& options = {});

/// Same spot-beta dynamics without prices; used where only the integrated
/// betas matter.
struct BetaPath {
  std::vector<double> ibeta;       // per day (Riemann sums)
  std::vector<double> h;           // per day, conditional expectation
  std::vector<double> beta_close;  // beta at integer times 0..n
  double next_h = 0.0;
  std::vector<double> spot;        // optional, steps_per_day*n+1
};

BetaPath simulate_beta(const DRBetaParams& dr, int steps_per_day, int n_days,
                       double beta0, std::uint64_t seed, bool keep_path = false);

/// rho_1 = (e^a - 1)/a, rho_2 = (e^a - 1 - a)/a^2,
/// rho_3 = (e^a - 1 - a - a^2/2)/a^3 for a = alpha_1; a Taylor series is
/// used for |a| < 1e-3, so a = 0 gives the limits (1, 1/2, 1/6).
struct RhoCoefficients {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
};
RhoCoefficients rho_coefficients(double alpha1);

/// Conditional expectation E[I beta_n | F_{n-1}] from the closed-form
/// integral of the drift, given beta at integer times and past daily
/// integrals. `beta_close[k]` is beta at time k, `ibeta[k]` the integral
/// over day k+1 (0-based); day n is 1-based here. Lags before time 0 use
/// `pre_sample`.
double conditional_ibeta(const DRBetaParams& dr, const std::vector<double>& beta_close,
                         const std::vector<double>& ibeta, int day, double pre_sample);

struct NoiseSeries {
  std::vector<double> eps1, eps2;
  std::vector<double> theta1, theta2;
  std::vector<double> chi1, chi2;
  long long clamps = 0;
};

/// Noise alone, with its own Brownian drivers for the scale processes.
/// `dt` is the day fraction between consecutive observations.
NoiseSeries simulate_noise_series(const NoiseParams& noise, int length,
                                  std::uint64_t seed, double dt = 1.0 / 23400.0);

/// Stationary covariance of chi_i = A chi_{i-1} + e_i. Throws if A is not
/// stable.
Eigen::Matrix2d stationary_covariance(const Eigen::Matrix2d& ar,
                                      const Eigen::Matrix2d& innov_cov);

/// Left-endpoint Riemann sum per day; day i uses indices [(i-1)m, im).
std::vector<double> true_integrated_beta(const std::vector<double>& spot_path,
                                         TimeGrid grid);

/// 4 nu^2 alpha^-4 int_0^1 {alpha(1-t-1/alpha) e^{alpha(1-t)} + 1}^2 t dt.
double d_variance_oracle(double alpha1, double nu, int quadrature_points = 4097);

/// Ito isometry of the martingale difference D_n:
/// nu^2 alpha^-4 int_0^1 {alpha(u-1/alpha) e^{alpha u} + 1}^2 du.
double d_variance_isometry(double alpha1, double nu, int quadrature_points = 4097);

void to_json(nlohmann::json& j, const DRBetaParams& p);
void from_json(const nlohmann::json& j, DRBetaParams& p);
void to_json(nlohmann::json& j, const VolParams& p);
void from_json(const nlohmann::json& j, VolParams& p);
void to_json(nlohmann::json& j, const NoiseParams& p);
void from_json(const nlohmann::json& j, NoiseParams& p);
void to_json(nlohmann::json& j, const InitialState& p);
void from_json(const nlohmann::json& j, InitialState& p);

}  // namespace drbeta::sim
