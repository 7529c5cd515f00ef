#pragma once

#include <span>
#include <vector>

namespace drbeta::stats {

double mean(std::span<const double> x);
/// Sample variance with n-1 denominator; 0 for fewer than two points.
double variance(std::span<const double> x);
double sd(std::span<const double> x);
/// Standard error of the mean.
double standard_error(std::span<const double> x);
double median(std::vector<double> x);

double normal_cdf(double z);
/// Two-sided p-value 2*(1 - Phi(|z|)).
double two_sided_p(double z);
double normal_quantile(double p);

/// Pearson correlation between the sorted sample and the standard normal
/// quantiles at plotting positions (i - 0.375)/(n + 0.25).
double qq_correlation(std::vector<double> x);

/// Sample autocorrelations at lags 1..max_lag (demeaned, biased
/// normalization).
std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> residuals;
};

/// Simple OLS of y on x with intercept. Throws ComputationError when x has
/// zero variance.
LinearFit ols(std::span<const double> x, std::span<const double> y);

}  // namespace drbeta::stats
