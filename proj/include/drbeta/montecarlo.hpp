#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "drbeta/model.hpp"
#include "drbeta/rib.hpp"
#include "drbeta/sim.hpp"

namespace drbeta::mc {

int default_threads();

template <typename T>
struct Outcome {
  bool ok = false;
  T value{};
  std::string error;
};

/// Runs fn(rep) for rep = 0..reps-1 on a worker pool. Results come back in
/// replication order; a throwing replication is recorded, not propagated.
template <typename T>
std::vector<Outcome<T>> run_replications(int reps, int threads,
                                         const std::function<T(int)>& fn) {
  std::vector<Outcome<T>> out(static_cast<std::size_t>(std::max(reps, 0)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      auto& o = out[static_cast<std::size_t>(r)];
      try {
        o.value = fn(r);
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min(threads, reps));
  if (nt == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

/// The simulation design used throughout the Monte Carlo studies.
struct Design {
  sim::DRBetaParams dr;
  sim::VolParams vol;
  sim::NoiseParams noise;
  sim::InitialState init;
};

struct EstimatorRep {
  double mse[3] = {0.0, 0.0, 0.0};  // RIB, CHEN, PRVB against the true daily integrals
  std::vector<double> studentized;  // m^{1/4}(RIB - I beta)/sqrt(avar), finite days only
};

/// Daily estimation errors of the three estimators on n-day panels.
std::vector<Outcome<EstimatorRep>> estimator_study(const Design& design, int m, int n, int reps,
                                                  std::uint64_t seed, int threads);

/// theta-hat from fitting (1,1) to noiseless integrated betas.
std::vector<Outcome<std::vector<double>>> fit_true_study(const sim::DRBetaParams& dr, int n,
                                                         int reps, int steps_per_day,
                                                         std::uint64_t seed, int threads);

struct CalibrationRep {
  std::vector<double> t_marginal;  // against theta_0
  std::vector<double> z;           // joint standardization against theta_0
  double err_dr = 0.0;             // forecast - h_{n+1}
  double err_armap = 0.0;
  double err_armac = 0.0;
};

/// (1,1) fit on RIB, marginal and joint statistics at theta_0, and one-step
/// forecast errors of DR Beta, ARMA(1,1) on PRVB and ARMA(1,1) on CHEN.
std::vector<Outcome<CalibrationRep>> calibration_study(const Design& design, int m, int n,
                                                       int reps, std::uint64_t seed,
                                                       int threads);

/// D_n = I beta_n - h_n over n_days simulated days.
std::vector<double> innovations(const sim::DRBetaParams& dr, int steps_per_day, int n_days,
                                std::uint64_t seed);

struct MappingCheck {
  double max_error = 0.0;  // max_n |h_recursion - h_direct|
  double step_bound = 0.0; // Euler-step bound of the direct integration
};

/// h_n from the low-frequency recursion at the mapped parameters versus a
/// fine-grid integration of the conditional drift on each day.
MappingCheck mapping_check(const sim::DRBetaParams& dr, int n_days, int sim_steps,
                           int integration_steps, std::uint64_t seed);

/// Expected integral over one day of the spot beta given the open and the
/// drift level A_n, by left-endpoint integration with `steps` steps. Also
/// returns the Euler-step bound 0.5 * delta * max|m'| * e^{|alpha_1|}.
std::pair<double, double> direct_conditional_ibeta(const sim::DRBetaParams& dr, double open,
                                                   double a_n, int steps);

}  // namespace drbeta::mc
