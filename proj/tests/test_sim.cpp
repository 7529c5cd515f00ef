#include <doctest.h>

#include <cmath>

#include "drbeta/model.hpp"
#include "drbeta/sim.hpp"
#include "drbeta/stats.hpp"

using namespace drbeta;
using namespace drbeta::sim;

namespace {

DRBetaParams deterministic(double omega1, double omega2) {
  DRBetaParams d;
  d.omega1 = omega1;
  d.omega2 = omega2;
  d.gamma = {0.0};
  d.alpha = {0.0};
  d.nu = 0.0;
  return d;
}

VolParams no_jumps() {
  VolParams v;
  v.lambda1 = 0.0;
  v.lambda2 = 0.0;
  return v;
}

}  // namespace

TEST_CASE("same seed gives identical output") {
  const auto a = simulate({}, {}, {}, {390, 3}, {}, 11);
  const auto b = simulate({}, {}, {}, {390, 3}, {}, 11);
  const auto c = simulate({}, {}, {}, {390, 3}, {}, 12);
  CHECK(a.observed.x1() == b.observed.x1());
  CHECK(a.observed.x2() == b.observed.x2());
  CHECK(a.spot_beta == b.spot_beta);
  CHECK(a.true_ibeta == b.true_ibeta);
  CHECK(a.observed.x2() != c.observed.x2());
}

TEST_CASE("zero feedback and diffusion gives a deterministic daily path") {
  // With alpha = gamma = nu = 0 the drift on day n is s^2 A - s(omega2 + beta_{n-1})
  // with A = omega1, so the close is omega1 - omega2 each day.
  InitialState init;
  init.beta0 = 0.2;
  const auto o = simulate(deterministic(0.0, -0.2), no_jumps(), NoiseParams::none(), {200, 4}, init, 5);
  for (int n = 0; n <= 4; ++n) CHECK(o.spot_beta[static_cast<std::size_t>(n * 200)] == doctest::Approx(0.2).epsilon(1e-12));
  // within the day beta_t = c + s^2 A - s(omega2 + c) with c = 0.2, A = 0
  for (int j = 0; j < 200; ++j) {
    const double s = j / 200.0;
    CHECK(o.spot_beta[static_cast<std::size_t>(200 + j)] == doctest::Approx(0.2 - s * 0.0).epsilon(1e-12));
  }
  const auto q = simulate(deterministic(0.5, 0.1), no_jumps(), NoiseParams::none(), {200, 2}, init, 5);
  for (int j = 0; j <= 200; ++j) {
    const double s = j / 200.0;
    CHECK(q.spot_beta[static_cast<std::size_t>(j)] ==
          doctest::Approx(0.2 + s * s * 0.5 - s * (0.1 + 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("no noise and no jumps gives observed equal to latent") {
  const auto o = simulate({}, no_jumps(), NoiseParams::none(), {390, 2}, {}, 3);
  CHECK(o.observed.x1() == o.latent.x1());
  CHECK(o.observed.x2() == o.latent.x2());
}

TEST_CASE("jump counts follow the intensity") {
  VolParams v;
  v.lambda1 = 4.0;
  const auto o = simulate({}, v, NoiseParams::none(), {100, 1000}, {}, 21);
  CHECK(std::abs(static_cast<double>(o.counters.jumps1) - 4000.0) < 3.0 * std::sqrt(4000.0));
}

TEST_CASE("spot beta is continuous at the day boundaries") {
  const int m = 2340;
  const auto o = simulate({}, {}, {}, {m, 5}, {}, 9);
  double max_step = 0.0, boundary_step = 0.0;
  for (std::size_t i = 1; i < o.spot_beta.size(); ++i) {
    const double d = std::abs(o.spot_beta[i] - o.spot_beta[i - 1]);
    max_step = std::max(max_step, d);
    if (i % m == 0) boundary_step = std::max(boundary_step, d);
  }
  // a step is a Gaussian increment of size nu sqrt(dt), about 0.03 here
  CHECK(max_step < 10.0 * 1.5 * std::sqrt(1.0 / m));
  CHECK(boundary_step < 10.0 * 1.5 * std::sqrt(1.0 / m));
}

TEST_CASE("integrated beta has the unconditional mean of the mapped model") {
  const DRBetaParams dr;
  const auto th = model::map_params(dr);
  const double target = th.unconditional_mean();
  const auto b = simulate_beta(dr, 100, 100000, 2.16, 77);
  std::vector<double> burn(b.ibeta.begin() + 100, b.ibeta.end());
  // daily integrals are autocorrelated; inflate the naive se by the AR sum
  const double phi = th.gamma[0] + th.alpha_g[0];
  const double se = stats::sd(burn) / std::sqrt(static_cast<double>(burn.size())) *
                    std::sqrt((1 + phi) / (1 - phi));
  CHECK(std::abs(stats::mean(burn) - target) < 3.0 * se);
}

TEST_CASE("innovations of the integrated beta are a martingale difference") {
  const auto b = simulate_beta({}, 100, 20000, 2.16, 31);
  std::vector<double> d(b.ibeta.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = b.ibeta[i] - b.h[i];
  CHECK(std::abs(stats::mean(d)) < 4.0 * stats::sd(d) / std::sqrt(static_cast<double>(d.size())));
  const auto acf = stats::autocorrelation(d, 2);
  CHECK(std::abs(acf[0]) < 4.0 / std::sqrt(static_cast<double>(d.size())));
}

TEST_CASE("noise series stationary moments") {
  NoiseParams n;
  const auto s = stationary_covariance(n.ar_coeff, n.innov_cov);
  CHECK(s(0, 0) == doctest::Approx(0.36 / (1 - 0.64)).epsilon(1e-12));
  CHECK(s(0, 1) == doctest::Approx(0.168 / 0.36).epsilon(1e-12));
  const auto ns = simulate_noise_series(n, 200000, 4);
  CHECK(stats::variance(ns.chi1) == doctest::Approx(1.0).epsilon(0.05));
  double c = 0.0;
  for (std::size_t i = 0; i < ns.chi1.size(); ++i) c += ns.chi1[i] * ns.chi2[i];
  CHECK(c / static_cast<double>(ns.chi1.size()) == doctest::Approx(0.168 / 0.36).epsilon(0.05));
  for (double t : ns.theta1) CHECK(t >= 0.0);
}

TEST_CASE("zero noise amplitude gives zero noise") {
  NoiseParams n;
  n.s1 = 0.0;
  const auto ns = simulate_noise_series(n, 1000, 4);
  for (double e : ns.eps1) CHECK(e == 0.0);
}

TEST_CASE("non-stationary noise rejected") {
  NoiseParams n;
  n.ar_coeff << 1.0, 0.0, 0.0, 0.5;
  CHECK_THROWS_AS(simulate_noise_series(n, 10, 1), InvalidArgument);
}

TEST_CASE("true integrated beta is a left Riemann sum") {
  std::vector<double> flat(3 * 100 + 1, 1.5);
  for (double v : true_integrated_beta(flat, {100, 3})) CHECK(v == 1.5);
  for (int m : {100, 1000, 10000}) {
    std::vector<double> lin(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) lin[static_cast<std::size_t>(j)] = static_cast<double>(j) / m;
    const double v = true_integrated_beta(lin, {m, 1})[0];
    CHECK(v == doctest::Approx(0.5 - 0.5 / m).epsilon(1e-12));
  }
  CHECK_THROWS_AS(true_integrated_beta(flat, {100, 2}), InvalidArgument);
}

TEST_CASE("Euler refinement converges") {
  // the same Brownian path at two resolutions is not available, so compare
  // the deterministic drift part: halving the step halves the Riemann error
  auto err = [](int m) {
    InitialState init;
    init.beta0 = 0.3;
    const auto o = simulate(deterministic(0.6, 0.1), no_jumps(), NoiseParams::none(), {m, 1}, init, 1);
    // exact integral of 0.3 + 0.6 s^2 - 0.4 s over [0,1]
    return std::abs(o.true_ibeta[0] - (0.3 + 0.2 - 0.2));
  };
  const double e1 = err(200), e2 = err(400);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("d variance oracle") {
  CHECK(d_variance_oracle(0.37, 0.0) == 0.0);
  CHECK(d_variance_oracle(0.37, 3.0) == doctest::Approx(4.0 * d_variance_oracle(0.37, 1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(d_variance_oracle(0.0, 1.5), InvalidArgument);
  // independent midpoint quadrature of the same integral
  const double a = 0.37, nu = 1.5;
  const int n = 1000000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    const double v = a * (1 - t - 1 / a) * std::exp(a * (1 - t)) + 1;
    s += v * v * t;
  }
  const double ref = 4 * nu * nu / std::pow(a, 4) * s / n;
  CHECK(d_variance_oracle(a, nu) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("parameter validation") {
  DRBetaParams d;
  d.gamma = {1.2};
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = {};
  d.rho = 1.5;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  VolParams v;
  v.lambda1 = -1.0;
  CHECK_THROWS_AS(v.validate(), InvalidArgument);
  CHECK_THROWS_AS(simulate({}, {}, {}, {50, 1}, {}, 1), InvalidArgument);
}

TEST_CASE("unstable parameters hit the divergence guard") {
  DRBetaParams d;
  d.alpha = {30.0};
  CHECK_THROWS_AS(simulate(d, {}, {}, {200, 20}, {}, 1), ComputationError);
}

TEST_CASE("parameter json round trip") {
  DRBetaParams d;
  d.gamma = {0.1, 0.05};
  nlohmann::json j = d;
  const auto back = j.get<DRBetaParams>();
  CHECK(back.gamma == d.gamma);
  CHECK(back.nu == d.nu);
  NoiseParams n;
  nlohmann::json jn = n;
  CHECK(jn.get<NoiseParams>().innov_cov == n.innov_cov);
  nlohmann::json bad = d;
  bad["extra"] = 1;
  CHECK_THROWS(bad.get<DRBetaParams>());
}
