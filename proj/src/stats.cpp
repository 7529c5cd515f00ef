#include "drbeta/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drbeta/core.hpp"

namespace drbeta::stats {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - mu) * (v - mu);
  return s / static_cast<double>(x.size() - 1);
}

double sd(std::span<const double> x) { return std::sqrt(variance(x)); }

double standard_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return sd(x) / std::sqrt(static_cast<double>(x.size()));
}

double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const auto n = x.size();
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n / 2), x.end());
  const double hi = x[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n / 2));
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("normal_quantile: p must lie in (0,1)");
  }
  // Acklam's rational approximation followed by one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double qq_correlation(std::vector<double> x) {
  const auto n = x.size();
  if (n < 3) throw InvalidArgument("qq_correlation: need at least 3 points");
  std::sort(x.begin(), x.end());
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) /
                           (static_cast<double>(n) + 0.25));
  }
  const double mx = mean(x), mq = mean(q);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (q[i] - mq);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (q[i] - mq) * (q[i] - mq);
  }
  if (sxx <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  const auto n = x.size();
  const double mu = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mu) * (v - mu);
  std::vector<double> out;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = static_cast<std::size_t>(lag); t < n; ++t) {
      c += (x[t] - mu) * (x[t - static_cast<std::size_t>(lag)] - mu);
    }
    out.push_back(c0 > 0.0 ? c / c0 : 0.0);
  }
  return out;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("ols: need two equal-length series with >= 2 points");
  }
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-300) throw ComputationError("ols: predictor has zero variance");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.residuals.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    f.residuals[i] = y[i] - f.intercept - f.slope * x[i];
  }
  return f;
}

}  // namespace drbeta::stats
