#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "drbeta/montecarlo.hpp"

namespace drbeta::acceptance {

/// Replication counts and simulation sizes for the acceptance checks.
struct Scale {
  int estimator_reps = 200;
  int estimator_days = 125;
  int fit_reps = 100;
  int fit_steps_per_day = 390;
  int calib_reps = 200;
  int calib_days = 500;
  int stud_reps = 300;
  int stud_days = 20;
  int d_days = 100000;
  int d_steps = 1000;
  int mapping_days = 100;
  int deriv_thetas = 100;
  int threads = 1;
  std::uint64_t seed = 7;

  /// Full replication counts.
  static Scale full();
  /// Reduced counts for a quick desk check; orderings are noisier.
  static Scale quick();
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::json metrics;
};

/// Runs the numbered checks; expensive simulations shared between checks
/// are computed once.
class Suite {
 public:
  Suite(Scale scale, std::string golden_manifest);
  ~Suite();

  CriterionResult run(int id);
  std::vector<CriterionResult> run_all();

  static constexpr int kCount = 11;
  static std::string name(int id);

 private:
  struct Cache;
  Scale scale_;
  std::string golden_;
  std::unique_ptr<Cache> cache_;
};

/// One line per result: "[PASS] 3 exact linearity: ...".
std::string format_line(const CriterionResult& r);

}  // namespace drbeta::acceptance
