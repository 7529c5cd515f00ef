#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drbeta/core.hpp"
#include "drbeta/preavg.hpp"

namespace drbeta::rib {

enum class Estimator { rib, chen, prvb };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

/// Daily estimates of one estimator over a panel.
struct RIBSeries {
  std::vector<double> rib;
  std::vector<double> avar;  // NaN where not available (CHEN, PRVB, failed days)
  std::vector<int> m_per_day;
  std::vector<std::string> labels;
  Estimator estimator_tag = Estimator::rib;
  /// Days whose estimation failed: (day index, reason). Their rib is NaN.
  std::vector<std::pair<int, std::string>> failures;

  std::size_t size() const { return rib.size(); }
};

double spot_beta(const preavg::SpotCovEstimate& est);

/// Second-order noise correction of a block's spot beta.
double debias_term(const preavg::SpotCovEstimate& est, const preavg::NoiseMomentEstimate& nm,
                   const WeightKernel& kernel, const TuningConfig& cfg, int m);

/// One block's contribution R^2 to the asymptotic variance, before the
/// floor at zero.
double avar_block_term(const preavg::SpotCovEstimate& est, const preavg::NoiseMomentEstimate& nm,
                       const WeightKernel& kernel, const TuningConfig& cfg, int m);

struct BlockResult {
  preavg::SpotCovEstimate cov;
  preavg::NoiseMomentEstimate noise;
  double beta = 0.0;
  double debias = 0.0;
  double r2 = 0.0;  // floored at 0
  bool r2_floored = false;
};

struct DayResult {
  double rib = 0.0;
  double avar = 0.0;
  /// m / (blocks * b_m) when coverage renormalization is on, else 1.
  double coverage = 1.0;
  int r2_floored = 0;
  std::vector<BlockResult> blocks;
  preavg::Thresholds thresholds;
};

/// RIB and its asymptotic variance for one day. With coverage
/// renormalization the block sum is scaled by `coverage` and the variance
/// by coverage^2.
DayResult rib_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel);
DayResult rib_day(const preavg::DayStatistics& st, const WeightKernel& kernel);

double rib_avar_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel);

struct ChenBlock {
  double sigma11 = 0.0, sigma12 = 0.0, sigma22 = 0.0;
  double theta11 = 0.0, theta12 = 0.0;
  double beta = 0.0, debias = 0.0;
};

struct ChenDayResult {
  double value = 0.0;
  std::vector<ChenBlock> blocks;
};

/// Block-wise pre-averaged betas with the i.i.d.-noise bias correction
/// and debias term. Increments are norm-truncated at sqrt(u1^2 + u2^2).
ChenDayResult chen_day_detail(const preavg::DayStatistics& st, const WeightKernel& kernel);
double chen_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel);

/// Whole-day pre-averaged covariance ratio. Throws ComputationError when
/// the market entry is not positive.
double prvb_day(const preavg::DayStatistics& st, const WeightKernel& kernel);
double prvb_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel);

using TuningProvider = std::function<TuningConfig(int m)>;

/// tuning_from_m with no overrides.
TuningProvider default_tuning();

/// All requested estimators over the panel, sharing one set of day
/// statistics per day. Days are independent; failures are collected per
/// day. `threads` <= 1 runs serially.
std::vector<RIBSeries> estimate_series(const PricePanel& panel, const TuningProvider& tuning,
                                       const WeightKernel& kernel,
                                       const std::vector<Estimator>& estimators,
                                       int threads = 1);

RIBSeries rib_series(const PricePanel& panel, const TuningProvider& tuning,
                     const WeightKernel& kernel, int threads = 1);

}  // namespace drbeta::rib
