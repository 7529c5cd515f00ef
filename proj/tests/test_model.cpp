#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "drbeta/model.hpp"
#include "drbeta/rng.hpp"
#include "drbeta/sim.hpp"
#include "drbeta/stats.hpp"

using namespace drbeta;
using namespace drbeta::model;

namespace {

GarchParams g11(double w, double g, double a) {
  GarchParams t;
  t.p = t.q = 1;
  t.omega_g = w;
  t.gamma = {g};
  t.alpha_g = {a};
  return t;
}

// Series from the low-frequency model itself: x_i = h_i + noise.
std::vector<double> garch_series(const GarchParams& th, int n, std::uint64_t seed, double sd = 0.3) {
  RandomStream rs(seed);
  const int r = th.r();
  std::vector<double> x(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n));
  const double mu = th.unconditional_mean();
  for (int i = 0; i < n; ++i) {
    double v = th.omega_g;
    for (int j = 1; j <= th.p; ++j) v += th.gamma[static_cast<std::size_t>(j - 1)] * (i - j >= 0 ? h[static_cast<std::size_t>(i - j)] : mu);
    for (int j = 1; j <= r; ++j) v += th.alpha_g[static_cast<std::size_t>(j - 1)] * (i - j >= 0 ? x[static_cast<std::size_t>(i - j)] : mu);
    h[static_cast<std::size_t>(i)] = v;
    x[static_cast<std::size_t>(i)] = v + sd * rs.normal();
  }
  return x;
}

}  // namespace

TEST_CASE("rho coefficients") {
  // series oracle: rho_k = sum_j a^j / (j + k)!
  auto series = [](double a, int k) {
    double s = 0.0, fact = 1.0;
    for (int i = 1; i <= k; ++i) fact *= i;
    double term = 1.0 / fact;
    for (int j = 0; j < 40; ++j) {
      s += term;
      term *= a / (j + k + 1);
    }
    return s;
  };
  const auto r = sim::rho_coefficients(0.37);
  CHECK(r.r1 == doctest::Approx(series(0.37, 1)).epsilon(1e-13));
  CHECK(r.r2 == doctest::Approx(series(0.37, 2)).epsilon(1e-13));
  CHECK(r.r3 == doctest::Approx(series(0.37, 3)).epsilon(1e-12));
  CHECK(r.r1 == doctest::Approx(1.21009).epsilon(1e-5));
  CHECK(r.r2 == doctest::Approx(0.56783).epsilon(1e-5));
  CHECK(r.r3 == doctest::Approx(0.18331).epsilon(1e-5));
  const auto s = sim::rho_coefficients(1e-8);
  CHECK(s.r1 == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.r2 == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s.r3 == doctest::Approx(1.0 / 6.0).epsilon(1e-7));
  for (double a : {-0.5, 0.002, 0.0009, 1.7}) {
    const auto t = sim::rho_coefficients(a);
    CHECK(t.r3 == doctest::Approx(series(a, 3)).epsilon(1e-10));
  }
}

TEST_CASE("mapped parameters reproduce the conditional expectation") {
  // h_n is exactly linear in (1, h_{n-1}, I beta_{n-1}); regress and compare
  sim::DRBetaParams dr;
  const auto th = map_params(dr);
  const auto b = sim::simulate_beta(dr, 50, 400, 2.16, 3);
  Eigen::MatrixXd X(399, 3);
  Eigen::VectorXd y(399);
  for (int i = 1; i < 400; ++i) {
    X(i - 1, 0) = 1.0;
    X(i - 1, 1) = b.h[static_cast<std::size_t>(i - 1)];
    X(i - 1, 2) = b.ibeta[static_cast<std::size_t>(i - 1)];
    y(i - 1) = b.h[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  CHECK(th.omega_g == doctest::Approx(c(0)).epsilon(1e-8));
  CHECK(th.gamma[0] == doctest::Approx(c(1)).epsilon(1e-8));
  CHECK(th.alpha_g[0] == doctest::Approx(c(2)).epsilon(1e-8));
  // frozen from the oracle above
  CHECK(th.omega_g == doctest::Approx(1.3011946).epsilon(1e-6));
  CHECK(th.gamma[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(th.alpha_g[0] == doctest::Approx(0.2512051).epsilon(1e-6));
}

TEST_CASE("mapping of a higher-order model") {
  sim::DRBetaParams dr;
  dr.gamma = {0.1, 0.05};
  dr.alpha = {0.37, 0.1};
  const auto th = map_params(dr);
  CHECK(th.p == 2);
  CHECK(th.q == 2);
  const auto b = sim::simulate_beta(dr, 50, 600, 2.16, 4);
  // regress h_n on (1, h_{n-1}, h_{n-2}, I beta_{n-1}, I beta_{n-2})
  const int n = 600;
  Eigen::MatrixXd X(n - 2, 5);
  Eigen::VectorXd y(n - 2);
  for (int i = 2; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    X.row(i - 2) << 1.0, b.h[u - 1], b.h[u - 2], b.ibeta[u - 1], b.ibeta[u - 2];
    y(i - 2) = b.h[u];
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  const auto v = th.to_vector();
  for (int k = 0; k < 5; ++k) CHECK(v[static_cast<std::size_t>(k)] == doctest::Approx(c(k)).epsilon(1e-7));
}

TEST_CASE("map params errors and continuity") {
  sim::DRBetaParams dr;
  dr.alpha = {0.0};
  CHECK_THROWS_AS(map_params(dr), InvalidArgument);
  dr.alpha = {5.0};
  CHECK_THROWS_AS(map_params(dr), InvalidArgument);
  for (double a = 0.01; a <= 2.0; a += 0.13) {
    sim::DRBetaParams d;
    d.alpha = {a};
    d.gamma = {0.0};
    d.omega2 = 0.0;
    try {
      const auto t0 = map_params(d).to_vector();
      d.alpha = {a + 1e-7};
      const auto t1 = map_params(d).to_vector();
      for (std::size_t k = 0; k < t0.size(); ++k) CHECK(std::isfinite((t1[k] - t0[k]) / 1e-7));
    } catch (const InvalidArgument&) {
      // outside the admissible set for this a
    }
  }
}

TEST_CASE("h recursion") {
  const auto th = g11(0.13, 0.25, 0.10);
  const std::vector<double> flat(200, 0.2);
  const auto h = h_recursion(th, flat, InitPolicy::zero);
  CHECK(h.back() == doctest::Approx(0.13 / (1 - 0.35)).epsilon(1e-12));
  const auto gz = g11(0.4, 0.0, 0.3);
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const auto hz = h_recursion(gz, x, InitPolicy::zero);
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(hz[i] == doctest::Approx(0.4 + 0.3 * x[i - 1]));
  CHECK_THROWS_AS(h_recursion(th, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(h_recursion(th, std::vector<double>{1.0, NAN, 2.0}), InvalidArgument);
}

TEST_CASE("h is measurable with respect to the past") {
  GarchParams t;
  t.p = 2;
  t.q = 3;
  t.omega_g = 0.1;
  t.gamma = {0.2, 0.1};
  t.alpha_g = {0.2, 0.1, 0.05};
  for (auto init : {InitPolicy::zero, InitPolicy::unconditional}) {
    const auto x = garch_series(t, 60, 9);
    const auto base = h_recursion(t, x, init);
    for (int k = 0; k < 60; ++k) {
      auto y = x;
      y[static_cast<std::size_t>(k)] += 1000.0;
      const auto h = h_recursion(t, y, init);
      for (int i = 0; i <= k; ++i) CHECK(h[static_cast<std::size_t>(i)] == base[static_cast<std::size_t>(i)]);
      if (k + 1 < 60 && k + 1 >= init_length(t)) CHECK(h[static_cast<std::size_t>(k + 1)] != base[static_cast<std::size_t>(k + 1)]);
    }
  }
}

TEST_CASE("quasi likelihood") {
  const auto th = g11(0.13, 0.25, 0.10);
  // x built so that x_i = h_i for every i
  std::vector<double> x(12, 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) x[i] = h_recursion(th, x, InitPolicy::zero)[i];
  CHECK(quasi_likelihood(th, x, InitPolicy::zero) == doctest::Approx(0.0).scale(1e-15));
  const auto h = h_recursion(th, x, InitPolicy::zero);
  auto y = x;
  // shifting only the last value by c leaves every h unchanged
  y.back() += 0.3;
  CHECK(quasi_likelihood(th, y, InitPolicy::zero, static_cast<int>(y.size()) - 1) == doctest::Approx(-0.09));
  // hand arithmetic: h = (0, 0.16, 0.18, 0.215)
  const std::vector<double> z = {0.3, 0.1, 0.4, 0.2};
  const double hand = -((0.1 - 0.16) * (0.1 - 0.16) + (0.4 - 0.18) * (0.4 - 0.18) + (0.2 - 0.215) * (0.2 - 0.215)) / 3.0;
  CHECK(quasi_likelihood(th, z, InitPolicy::zero) == doctest::Approx(hand).epsilon(1e-12));
  const auto g = garch_series(th, 100, 3);
  CHECK(quasi_likelihood(th, g) < 0.0);
}

TEST_CASE("recursive derivatives match finite differences") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto [p, q] : {std::pair{1, 1}, {2, 1}, {1, 2}, {2, 2}, {0, 1}}) {
    for (int trial = 0; trial < 20; ++trial) {
      GarchParams t;
      t.p = p;
      t.q = q;
      t.omega_g = 0.2 + 0.2 * u(eng);
      t.gamma.resize(static_cast<std::size_t>(p));
      t.alpha_g.resize(static_cast<std::size_t>(t.r()));
      for (auto& g : t.gamma) g = 0.35 * u(eng) / std::max(p, 1);
      for (auto& a : t.alpha_g) a = 0.25 * u(eng) / t.r();
      if (t.violation() > 0) continue;
      const auto x = garch_series(g11(0.1, 0.3, 0.2), 80, static_cast<std::uint64_t>(trial));
      for (auto init : {InitPolicy::sample_mean, InitPolicy::zero, InitPolicy::unconditional}) {
        const auto d = h_derivatives(t, x, init);
        const auto v = t.to_vector();
        for (std::size_t k = 0; k < v.size(); ++k) {
          auto a = v, b = v;
          a[k] += 1e-6;
          b[k] -= 1e-6;
          const auto ha = h_recursion(GarchParams::from_vector(p, q, a), x, init);
          const auto hb = h_recursion(GarchParams::from_vector(p, q, b), x, init);
          for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) - (ha[i] - hb[i]) / 2e-6) < 1e-6);
          }
        }
      }
    }
  }
}

TEST_CASE("derivative of h in omega is one without feedback") {
  const auto t = g11(0.3, 0.0, 0.2);
  const auto x = garch_series(t, 30, 2);
  const auto d = h_derivatives(t, x, InitPolicy::zero);
  for (int i = 1; i < 30; ++i) CHECK(d(i, 0) == 1.0);
}

TEST_CASE("fit recovers parameters of the low-frequency model") {
  const auto th = g11(0.13, 0.25, 0.10);
  const auto x = garch_series(th, 3000, 77, 0.05);
  const auto f = fit(x, 1, 1);
  CHECK(f.converged);
  CHECK(f.theta_hat.omega_g == doctest::Approx(0.13).epsilon(0.5));
  CHECK(std::abs(f.theta_hat.gamma[0] + f.theta_hat.alpha_g[0] - 0.35) < 0.15);
  CHECK(f.vhat_available);
  CHECK(f.loglik <= 0.0);
  for (double p : f.p_values) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  const Eigen::MatrixXd v = f.vhat;
  CHECK((v - v.transpose()).norm() < 1e-12 * v.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
}

TEST_CASE("fit on noiseless integrated betas is close to the mapped parameters") {
  const sim::DRBetaParams dr;
  const auto th0 = map_params(dr);
  const auto b = sim::simulate_beta(dr, 390, 2000, 2.16, 123);
  const auto f = fit(b.ibeta, 1, 1);
  const auto v = f.theta_hat.to_vector(), v0 = th0.to_vector();
  CHECK(std::abs(v[1] - v0[1]) < 0.1);
  CHECK(std::abs(v[2] - v0[2]) < 0.1);
  CHECK(std::abs(v[0] - v0[0]) < 0.3);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit(std::vector<double>(29, 1.0), 1, 1), InvalidArgument);
  CHECK_THROWS_AS(fit(std::vector<double>(100, 0.7), 1, 1), ComputationError);
}

TEST_CASE("fit is sensitive to the order of days") {
  const auto x = garch_series(g11(0.1, 0.4, 0.3), 400, 8);
  auto y = x;
  std::mt19937_64 eng(1);
  std::shuffle(y.begin(), y.end(), eng);
  const auto a = fit(x, 1, 1), b = fit(y, 1, 1);
  CHECK(std::abs(a.theta_hat.alpha_g[0] - b.theta_hat.alpha_g[0]) > 1e-3);
}

TEST_CASE("z statistics") {
  const std::vector<double> th = {0.1, 0.2, 0.3};
  const Eigen::MatrixXd v = Eigen::MatrixXd::Identity(3, 3);
  const auto z0 = z_statistics(th, v, 100, th);
  for (double z : z0.z) CHECK(z == 0.0);
  const auto z1 = z_statistics({1.96 / 10.0, 0.0, 0.0}, v, 100);
  CHECK(z1.z[0] == doctest::Approx(1.96));
  CHECK(z1.p_values[0] == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(z1.p_values[1] == doctest::Approx(1.0));
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS(z_statistics(th, bad, 100), ComputationError);
  const auto t = marginal_t({0.2, 0.0, 0.0}, 4.0 * v, 100);
  CHECK(t[0] == doctest::Approx(1.0));
}

TEST_CASE("singular gram matrix names the collinear coefficients") {
  // a constant series makes dh/domega = 1 and dh/dalpha = x constant
  const std::vector<double> x(100, 0.5);
  const auto t = g11(0.2, 0.0, 0.3);
  CHECK_THROWS_WITH_AS(avar_estimate(t, x, InitPolicy::zero), doctest::Contains("omega_g"), ComputationError);
}

TEST_CASE("bic selection") {
  const auto x = garch_series(g11(0.1, 0.5, 0.3), 2000, 31, 0.3);
  const auto b = bic_select(x, 2, 2);
  CHECK(b.p == 1);
  CHECK(b.q == 1);
  CHECK(b.table.size() == 9);
  for (const auto& c : b.table) {
    if (c.q < c.p) CHECK_FALSE(c.ok);
  }
  RandomStream rs(2);
  std::vector<double> w(2000);
  for (auto& v : w) v = 1.0 + 0.3 * rs.normal();
  const auto c = bic_select(w, 2, 2);
  CHECK(c.p == 0);
  CHECK(c.q == 0);
  // for equal k a smaller RSS means a smaller BIC
  for (const auto& a : c.table)
    for (const auto& d : c.table)
      if (a.ok && d.ok && a.k == d.k && a.rss < d.rss) CHECK(a.bic < d.bic);
}

TEST_CASE("forecast") {
  GarchParams flat;
  flat.p = flat.q = 1;
  flat.omega_g = 0.4;
  flat.gamma = {0.0};
  flat.alpha_g = {0.0};
  CHECK(forecast_h(flat, std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(0.4));
  const auto th = g11(0.13, 0.25, 0.10);
  // with the sample-mean start h_0 = (x_0 + 0.3)/2, x_0 = 0.0825/0.225 makes h_1 = 0.25
  const std::vector<double> x = {0.0825 / 0.225, 0.3};
  CHECK(h_recursion(th, x)[1] == doctest::Approx(0.25));
  CHECK(forecast_h(th, x) == doctest::Approx(0.2225));
  // two steps ahead replaces the unseen value by its forecast
  CHECK(forecast_h(th, x, InitPolicy::sample_mean, 2) == doctest::Approx(0.13 + 0.35 * 0.2225));
}

TEST_CASE("arma forecaster") {
  RandomStream rs(4);
  std::vector<double> ar(5000);
  double v = 0.0;
  for (auto& a : ar) {
    v = 1.0 + 0.5 * (v - 2.0) + 0.5 * rs.normal() + 1.0;
    a = v;
  }
  const auto f = arma_forecaster(ar, 1, 0);
  CHECK(std::abs(f.ar[0] - 0.5) < 0.05);
  std::vector<double> w(3000);
  for (auto& a : w) a = 2.0 + rs.normal();
  CHECK(arma_forecaster(w, 1, 1).forecast == doctest::Approx(stats::mean(w)).epsilon(0.1));
  CHECK(arma_forecaster(std::vector<double>(50, 1.7), 1, 1).forecast == 1.7);
  CHECK_THROWS_AS(arma_forecaster(std::vector<double>(10, 1.0), 1, 1), InvalidArgument);
}

TEST_CASE("evaluation metrics") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK(evaluate(a, a, Metric::msfe) == 0.0);
  CHECK(evaluate(a, a, Metric::mape) == 0.0);
  const std::vector<double> b = {1.5, 2.5, 3.5};
  CHECK(evaluate(a, b, Metric::msfe) == doctest::Approx(0.25));
  CHECK(evaluate(a, b, Metric::mape) == doctest::Approx(0.5));
  const std::vector<double> t = {2.0, 2.0, 5.0};
  CHECK(evaluate(a, t, Metric::msfe) == doctest::Approx(5.0 / 3.0));
  CHECK(evaluate(a, t, Metric::mape) == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluate(a, std::vector<double>{1.0}, Metric::msfe), InvalidArgument);
  CHECK(metric_from_string("mape") == Metric::mape);
}

TEST_CASE("residual acf diagnostic") {
  RandomStream rs(6);
  std::vector<double> pred(2000), rib(2000);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = rs.normal();
    rib[i] = 1.0 + 2.0 * pred[i] + 0.5 * rs.normal();
  }
  const auto d = residual_acf_diagnostic(rib, pred, 5);
  CHECK(d.b == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::abs(d.acf[0]) < 2.0 / std::sqrt(2000.0) * 1.5);
  CHECK(residual_acf_diagnostic(rib, rib, 5).degenerate);
  CHECK_THROWS_AS(residual_acf_diagnostic(rib, std::vector<double>(2000, 1.0), 5), ComputationError);
}

TEST_CASE("garch json") {
  const auto t = g11(0.1, 0.2, 0.3);
  nlohmann::json j = t;
  const auto b = j.get<GarchParams>();
  CHECK(b.to_vector() == t.to_vector());
  j["bogus"] = 1;
  CHECK_THROWS(j.get<GarchParams>());
}
