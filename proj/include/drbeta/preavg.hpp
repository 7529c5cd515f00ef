#pragma once

#include <array>
#include <span>
#include <vector>

#include "drbeta/core.hpp"

namespace drbeta::preavg {

// ---------------------------------------------------------------------------
// Pointwise building blocks
// ---------------------------------------------------------------------------

/// sum_{j=1}^{k-1} g(j/k) (P_{l+j} - P_{l+j-1}).
double preaveraged_increment(std::span<const double> p, int l, int k_m, const WeightFunction& g);

/// (1/l_m) sum_{i=0}^{l_m-1} P_{l+i}.
double local_average(std::span<const double> p, int l, int l_m);

/// (P_l - Pbar_{l+2 l_m}) (P'_{l+d} - Pbar'_{l+4 l_m}); d may be negative
/// as long as l + d >= 0.
double noise_lag_statistic(std::span<const double> p, std::span<const double> q, int l, int d,
                           int l_m);

/// sum_{d=-k'}^{k'} phi_d * noise_lag_statistic(p, q, l, d); `phi` holds the
/// weights for d = -k'..k' (see discrete_phi_weights).
double noise_weighted_stat(std::span<const double> p, std::span<const double> q, int l,
                           int l_m, std::span<const double> phi);

/// Unweighted lag sum used by the noise-moment estimators.
double noise_lag_sum(std::span<const double> p, std::span<const double> q, int l, int l_m,
                     int k_prime_m);

// ---------------------------------------------------------------------------
// Per-day precomputation
// ---------------------------------------------------------------------------

enum Pair { p11 = 0, p12 = 1, p22 = 2 };

/// Absolute truncation levels for one day. Pre-averaged increments are
/// compared on their own scale (|Y~| <= u1).
struct Thresholds {
  double u1 = kInf, u2 = kInf;
  std::array<double, 3> noise_weighted{kInf, kInf, kInf};  // Ehat, pairs 11/12/22
  std::array<double, 3> noise_unweighted{kInf, kInf, kInf};  // Edot
};

/// Everything the block estimators need for one day, computed once.
struct DayStatistics {
  int m = 0;
  TuningConfig cfg;
  std::vector<double> y1, y2;   // copies of the day's observations
  std::vector<double> pa1, pa2;  // Y~_l for l = 0..m-k+1
  std::vector<double> phi;       // phi_d, d = -k'..k'
  /// Ehat and Edot per start index l, valid for l in [lag_first, lag_last].
  std::array<std::vector<double>, 3> ehat, edot;
  int lag_first = 0, lag_last = -1;
  Thresholds thresholds;
};

/// Builds the day statistics and resolves the thresholds according to
/// cfg.threshold_mode.
DayStatistics day_statistics(const DayView& day, const TuningConfig& cfg,
                             const WeightKernel& kernel);

/// Resolves truncation levels for a day whose increment and noise
/// statistics are already filled in.
Thresholds resolve_thresholds(const DayStatistics& st);

// ---------------------------------------------------------------------------
// Block estimators
// ---------------------------------------------------------------------------

struct TruncationCounts {
  int increment_terms = 0;
  std::array<int, 3> increment_clipped{0, 0, 0};
  int noise_terms = 0;
  std::array<int, 3> noise_clipped{0, 0, 0};
};

struct SpotCovEstimate {
  double sigma11 = 0.0, sigma12 = 0.0, sigma22 = 0.0;
  double sigma11_floored = 0.0;
  int block_start = 0;
  TruncationCounts truncation;
  /// Every pre-averaged term of sigma11 was clipped; the entries are 0.
  bool all_truncated = false;
};

struct NoiseMomentEstimate {
  double theta11 = 0.0, theta12 = 0.0, theta22 = 0.0;
  int block_start = 0;
  std::array<int, 3> clipped{0, 0, 0};
  int terms = 0;
  /// Number of diagonal entries raised to 0.
  int floored = 0;
};

/// Start index and count of the noise-statistic terms inside a block.
struct NoiseWindow {
  int first = 0;
  int count = 0;
};
NoiseWindow noise_window(int block_start, const TuningConfig& cfg);

SpotCovEstimate spot_covariance(const DayStatistics& st, int block_start,
                                const WeightKernel& kernel);
NoiseMomentEstimate noise_moments(const DayStatistics& st, int block_start);

/// Convenience overloads that build the day statistics first.
SpotCovEstimate spot_covariance(const DayView& day, int block_start, const TuningConfig& cfg,
                                const WeightKernel& kernel);
NoiseMomentEstimate noise_moments(const DayView& day, int block_start, const TuningConfig& cfg,
                                  const WeightKernel& kernel);

/// Number of full blocks of length b_m in a day of m steps.
int block_count(int m, int b_m);

}  // namespace drbeta::preavg
