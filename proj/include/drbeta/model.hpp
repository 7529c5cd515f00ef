#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "drbeta/sim.hpp"

namespace drbeta::model {

/// theta = (omega_g, gamma_1..gamma_p, alpha_g_1..alpha_g_{p v q}).
struct GarchParams {
  int p = 1;
  int q = 1;
  double omega_g = 0.0;
  std::vector<double> gamma;
  std::vector<double> alpha_g;

  int r() const { return std::max(p, q); }
  int n_params() const { return 1 + p + r(); }

  std::vector<double> to_vector() const;
  static GarchParams from_vector(int p, int q, std::span<const double> v);

  /// Amount by which theta leaves the admissible set (0 when inside):
  /// sum|gamma| < 1 and sum_i |1{i<=p} gamma_i + alpha_g_i| < 1.
  double violation() const;
  /// Shape check plus the admissible-set inequalities.
  void validate() const;
  /// Unconditional mean omega_g / (1 - sum gamma - sum alpha_g).
  double unconditional_mean() const;
};

/// Low-frequency parameters implied by the continuous-time ones.
GarchParams map_params(const sim::DRBetaParams& dr);

enum class InitPolicy { sample_mean, zero, unconditional };

std::string to_string(InitPolicy p);
InitPolicy init_policy_from_string(const std::string& s);

/// Number of leading h values fixed by the initialization policy.
int init_length(const GarchParams& theta);

/// h_i = omega_g + sum gamma_j h_{i-j} + sum alpha_g_j x_{i-j} for
/// i >= init_length; h_i depends only on x_j with j < i.
std::vector<double> h_recursion(const GarchParams& theta, std::span<const double> x,
                                InitPolicy init = InitPolicy::sample_mean);

/// Exact derivatives dh_i/dtheta from differentiating the recursion; row i
/// holds the gradient of h_i.
Eigen::MatrixXd h_derivatives(const GarchParams& theta, std::span<const double> x,
                              InitPolicy init = InitPolicy::sample_mean);

/// -(1/N) sum_{i >= first} (x_i - h_i)^2; `first` < 0 means init_length.
double quasi_likelihood(const GarchParams& theta, std::span<const double> x,
                        InitPolicy init = InitPolicy::sample_mean, int first = -1);

struct FitOptions {
  int grid_starts = 8;
  bool moment_start = true;
  int max_iter = 4000;
  double tol = 1e-12;
  InitPolicy init = InitPolicy::sample_mean;
  /// First index entering the objective; < 0 means init_length.
  int first_index = -1;
};

struct FitResult {
  GarchParams theta_hat;
  double loglik = 0.0;
  Eigen::MatrixXd vhat;
  double vhat_condition = 0.0;
  std::vector<double> z_stats;
  std::vector<double> p_values;
  std::vector<double> t_marginal;
  int n_used = 0;
  bool converged = false;
  double multistart_spread = 0.0;
  std::vector<double> start_objectives;
  bool vhat_available = false;
  std::string vhat_error;
};

/// Quasi-maximum likelihood over the admissible set. vhat, z_stats and
/// p_values are filled when the derivative Gram matrix is invertible
/// (vhat_available).
FitResult fit(std::span<const double> x, int p, int q, const FitOptions& options = {});

struct AvarResult {
  Eigen::MatrixXd vhat;
  double condition = 0.0;
};

/// V = mean squared residual * (mean dh dh')^{-1}; throws ComputationError
/// naming the near-collinear coefficients when the Gram matrix is singular.
AvarResult avar_estimate(const GarchParams& theta, std::span<const double> x,
                         InitPolicy init = InitPolicy::sample_mean, int first = -1);

struct ZResult {
  std::vector<double> z;
  std::vector<double> p_values;
};

/// sqrt(n) V^{-1/2} (theta - null) with a symmetric eigendecomposition
/// square root; `null` empty means zeros.
ZResult z_statistics(const std::vector<double>& theta, const Eigen::MatrixXd& vhat, int n,
                     std::vector<double> null = {});

/// Per-coefficient sqrt(n)(theta_j - null_j)/sqrt(V_jj).
std::vector<double> marginal_t(const std::vector<double>& theta, const Eigen::MatrixXd& vhat,
                               int n, std::vector<double> null = {});

std::vector<std::string> coefficient_names(int p, int q);

struct BicCell {
  int p = 0, q = 0;
  int k = 0;
  double rss = 0.0;
  double bic = 0.0;
  bool ok = false;
  std::string error;
};

struct BicResult {
  int p = 0, q = 0;
  std::vector<BicCell> table;
};

/// Gaussian pseudo-BIC n ln(RSS/n) + k ln n over p in 0..max_p, q in
/// 0..max_q on a common sample. Cells with q < p repeat the (p,p) model
/// and are listed without a fit.
BicResult bic_select(std::span<const double> x, int max_p = 3, int max_q = 3,
                     const FitOptions& options = {});

/// h_{n+horizon} after the series; future x replaced by their forecasts.
double forecast_h(const GarchParams& theta, std::span<const double> x,
                  InitPolicy init = InitPolicy::sample_mean, int horizon = 1);

struct ArmaFit {
  int p = 1, q = 1;
  double intercept = 0.0;
  std::vector<double> ar, ma;
  double sigma2 = 0.0;
  double forecast = 0.0;
  bool invertible = true;
  std::string tag;
};

/// ARMA(p,q) by conditional least squares and its one-step forecast.
ArmaFit arma_forecaster(std::span<const double> x, int p = 1, int q = 1,
                        const std::string& tag = "");

enum class Metric { msfe, mape };
Metric metric_from_string(const std::string& s);
double evaluate(std::span<const double> pred, std::span<const double> target, Metric metric);

struct AcfDiagnostic {
  double a = 0.0, b = 0.0;
  std::vector<double> acf;
  bool degenerate = false;
};

/// OLS of rib on pred and the residual autocorrelations at lags 1..max_lag.
AcfDiagnostic residual_acf_diagnostic(std::span<const double> rib, std::span<const double> pred,
                                      int max_lag);

void to_json(nlohmann::json& j, const GarchParams& g);
void from_json(const nlohmann::json& j, GarchParams& g);
nlohmann::json fit_to_json(const FitResult& f);

}  // namespace drbeta::model
