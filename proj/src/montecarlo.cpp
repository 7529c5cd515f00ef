#include "drbeta/montecarlo.hpp"

#include <cmath>

#include "drbeta/rng.hpp"

namespace drbeta::mc {

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::vector<Outcome<EstimatorRep>> estimator_study(const Design& design, int m, int n, int reps,
                                                  std::uint64_t seed, int threads) {
  const std::function<EstimatorRep(int)> fn = [&](int r) {
    const auto out = sim::simulate(design.dr, design.vol, design.noise, TimeGrid{m, n}, design.init,
                                   derive_seed(seed, static_cast<std::uint64_t>(r), "sim"));
    const auto series = rib::estimate_series(
        out.observed, rib::default_tuning(), default_kernel(),
        {rib::Estimator::rib, rib::Estimator::chen, rib::Estimator::prvb});
    EstimatorRep rep;
    for (int e = 0; e < 3; ++e) {
      const auto& s = series[static_cast<std::size_t>(e)];
      if (!s.failures.empty()) {
        throw ComputationError(rib::to_string(s.estimator_tag) + " failed on day " +
                               std::to_string(s.failures.front().first + 1) + ": " +
                               s.failures.front().second);
      }
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = s.rib[static_cast<std::size_t>(i)] - out.true_ibeta[static_cast<std::size_t>(i)];
        acc += d * d;
      }
      rep.mse[e] = acc / n;
    }
    const double scale = std::pow(static_cast<double>(m), 0.25);
    for (int i = 0; i < n; ++i) {
      const double av = series[0].avar[static_cast<std::size_t>(i)];
      if (av > 0.0 && std::isfinite(av)) {
        rep.studentized.push_back(scale * (series[0].rib[static_cast<std::size_t>(i)] -
                                           out.true_ibeta[static_cast<std::size_t>(i)]) /
                                  std::sqrt(av));
      }
    }
    return rep;
  };
  return run_replications<EstimatorRep>(reps, threads, fn);
}

std::vector<Outcome<std::vector<double>>> fit_true_study(const sim::DRBetaParams& dr, int n,
                                                         int reps, int steps_per_day,
                                                         std::uint64_t seed, int threads) {
  const sim::InitialState init;
  const std::function<std::vector<double>(int)> fn = [&](int r) {
    const auto path = sim::simulate_beta(dr, steps_per_day, n, init.beta0,
                                         derive_seed(seed, static_cast<std::uint64_t>(r), "beta"));
    return model::fit(path.ibeta, dr.p(), dr.q()).theta_hat.to_vector();
  };
  return run_replications<std::vector<double>>(reps, threads, fn);
}

std::vector<Outcome<CalibrationRep>> calibration_study(const Design& design, int m, int n,
                                                       int reps, std::uint64_t seed,
                                                       int threads) {
  const auto theta0 = model::map_params(design.dr).to_vector();
  const std::function<CalibrationRep(int)> fn = [&](int r) {
    const auto out = sim::simulate(design.dr, design.vol, design.noise, TimeGrid{m, n}, design.init,
                                   derive_seed(seed, static_cast<std::uint64_t>(r), "sim"));
    const auto series = rib::estimate_series(
        out.observed, rib::default_tuning(), default_kernel(),
        {rib::Estimator::rib, rib::Estimator::chen, rib::Estimator::prvb});
    for (const auto& s : series) {
      if (!s.failures.empty()) {
        throw ComputationError(rib::to_string(s.estimator_tag) + " failed: " + s.failures.front().second);
      }
    }
    const auto fit = model::fit(series[0].rib, design.dr.p(), design.dr.q());
    if (!fit.vhat_available) throw ComputationError(fit.vhat_error);
    CalibrationRep rep;
    const auto th = fit.theta_hat.to_vector();
    rep.t_marginal = model::marginal_t(th, fit.vhat, fit.n_used, theta0);
    rep.z = model::z_statistics(th, fit.vhat, fit.n_used, theta0).z;
    rep.err_dr = model::forecast_h(fit.theta_hat, series[0].rib) - out.next_h;
    rep.err_armap = model::arma_forecaster(series[2].rib, 1, 1, "ARMAP").forecast - out.next_h;
    rep.err_armac = model::arma_forecaster(series[1].rib, 1, 1, "ARMAC").forecast - out.next_h;
    return rep;
  };
  return run_replications<CalibrationRep>(reps, threads, fn);
}

std::vector<double> innovations(const sim::DRBetaParams& dr, int steps_per_day, int n_days,
                                std::uint64_t seed) {
  const sim::InitialState init;
  const auto path = sim::simulate_beta(dr, steps_per_day, n_days, init.beta0, seed);
  std::vector<double> d(path.ibeta.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = path.ibeta[i] - path.h[i];
  return d;
}

std::pair<double, double> direct_conditional_ibeta(const sim::DRBetaParams& dr, double open,
                                                   double a_n, int steps) {
  if (steps < 1) throw InvalidArgument("direct_conditional_ibeta: steps must be >= 1");
  const double a1 = dr.alpha.empty() ? 0.0 : dr.alpha[0];
  const double h = 1.0 / steps;
  double m = open, integral = 0.0, max_slope = 0.0;
  for (int j = 1; j <= steps; ++j) {
    integral += m * h;
    const double s = j * h;
    const double next = open + s * s * a_n - s * (dr.omega2 + open) + a1 * integral;
    max_slope = std::max(max_slope, std::abs(next - m) / h);
    m = next;
  }
  return {integral, 0.5 * h * max_slope * std::exp(std::abs(a1))};
}

MappingCheck mapping_check(const sim::DRBetaParams& dr, int n_days, int sim_steps,
                           int integration_steps, std::uint64_t seed) {
  const sim::InitialState init;
  const auto path = sim::simulate_beta(dr, sim_steps, n_days, init.beta0, seed);
  const auto theta = model::map_params(dr);
  const int r0 = model::init_length(theta);
  // recursion started from the exact values of the first r0 days
  std::vector<double> h(static_cast<std::size_t>(n_days));
  for (int i = 0; i < n_days; ++i) {
    if (i < std::max(r0, 1)) {
      h[static_cast<std::size_t>(i)] = path.h[static_cast<std::size_t>(i)];
      continue;
    }
    double v = theta.omega_g;
    for (int j = 1; j <= theta.p; ++j) v += theta.gamma[static_cast<std::size_t>(j - 1)] * h[static_cast<std::size_t>(i - j)];
    for (int j = 1; j <= theta.r(); ++j) v += theta.alpha_g[static_cast<std::size_t>(j - 1)] * path.ibeta[static_cast<std::size_t>(i - j)];
    h[static_cast<std::size_t>(i)] = v;
  }
  auto close = [&](int k) { return k >= 0 ? path.beta_close[static_cast<std::size_t>(k)] : init.beta0; };
  auto ib = [&](int d) { return d >= 1 ? path.ibeta[static_cast<std::size_t>(d - 1)] : init.beta0; };
  MappingCheck res;
  for (int day = 1; day <= n_days; ++day) {
    double a_n = dr.omega1;
    for (int i = 1; i <= dr.p(); ++i) a_n += dr.gamma[static_cast<std::size_t>(i - 1)] * close(day - i);
    for (int j = 2; j <= dr.q(); ++j) a_n += dr.alpha[static_cast<std::size_t>(j - 1)] * ib(day + 1 - j);
    const auto [direct, bound] = direct_conditional_ibeta(dr, close(day - 1), a_n, integration_steps);
    res.max_error = std::max(res.max_error, std::abs(h[static_cast<std::size_t>(day - 1)] - direct));
    res.step_bound = std::max(res.step_bound, bound);
  }
  return res;
}

}  // namespace drbeta::mc
