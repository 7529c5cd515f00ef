#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drbeta/rib.hpp"
#include "drbeta/rng.hpp"
#include "drbeta/sim.hpp"
#include "drbeta/stats.hpp"

using namespace drbeta;
using namespace drbeta::rib;

namespace {

std::pair<std::vector<double>, std::vector<double>> affine_day(int m, double beta, double a,
                                                               std::uint64_t seed) {
  RandomStream rs(seed);
  std::vector<double> y1(static_cast<std::size_t>(m) + 1), y2(y1.size());
  double x = 0.0, e = 0.0;
  for (int j = 0; j <= m; ++j) {
    if (j > 0) x += 0.2 * std::sqrt(1.0 / m) * rs.normal();
    e = 0.8 * e + 0.6 * rs.normal();
    y1[static_cast<std::size_t>(j)] = x + 5e-4 * e;
  }
  for (std::size_t j = 0; j < y1.size(); ++j) y2[j] = a + beta * y1[j];
  return {y1, y2};
}

// Debias term coded straight from its definition.
double debias_oracle(double s11, double s12, double t11, double t12, int k, int b, int m) {
  const double dt = 1.0 / m;
  const double ck = k * std::sqrt(dt);
  const double psi0 = 1.0 / 12.0, phi01 = 1.0 / 96.0, phi11 = 1.0 / 6.0;
  const double pre = 4.0 / (psi0 * psi0 * ck * ck * ck * b * std::sqrt(dt));
  return pre * (ck * ck * phi01 / s11 + phi11 * t11 / (s11 * s11)) * (t11 * s12 / s11 - t12);
}

}  // namespace

TEST_CASE("spot beta uses the floored denominator") {
  preavg::SpotCovEstimate e;
  e.sigma11 = 0.2;
  e.sigma11_floored = 0.2;
  e.sigma12 = 0.3;
  CHECK(spot_beta(e) == doctest::Approx(1.5));
  e.sigma11 = 1e-6;
  e.sigma11_floored = 1e-5;
  e.sigma12 = 1e-7;
  CHECK(spot_beta(e) == doctest::Approx(0.01));
}

TEST_CASE("debias term") {
  const int m = 2340;
  const auto cfg = tuning_from_m(m);
  const auto& k = default_kernel();
  preavg::SpotCovEstimate c;
  c.sigma11 = c.sigma11_floored = 0.037;
  c.sigma12 = 0.051;
  preavg::NoiseMomentEstimate n;
  CHECK(debias_term(c, n, k, cfg, m) == 0.0);
  n.theta11 = 3e-7;
  n.theta12 = spot_beta(c) * n.theta11;
  CHECK(std::abs(debias_term(c, n, k, cfg, m)) < 1e-15);
  n.theta12 = -1.1e-7;
  CHECK(debias_term(c, n, k, cfg, m) ==
        doctest::Approx(debias_oracle(0.037, 0.051, 3e-7, -1.1e-7, cfg.k_m, cfg.b_m, m)).epsilon(1e-12));
}

TEST_CASE("block variance term") {
  const int m = 2340;
  const auto cfg = tuning_from_m(m);
  const auto& k = default_kernel();
  preavg::SpotCovEstimate c;
  c.sigma11 = c.sigma11_floored = 0.04;
  c.sigma12 = 0.06;
  c.sigma22 = 0.09;
  preavg::NoiseMomentEstimate n;
  CHECK(std::abs(avar_block_term(c, n, k, cfg, m)) < 1e-15);
  // doubling the noise scale multiplies theta by 4; with sigma fixed the
  // variance groups are polynomials of degree 0, 1 and 2 in theta
  c.sigma22 = 0.1;
  n.theta11 = 1e-6;
  n.theta12 = 4e-7;
  n.theta22 = 3e-6;
  auto at = [&](double s) {
    preavg::NoiseMomentEstimate x = n;
    x.theta11 *= s;
    x.theta12 *= s;
    x.theta22 *= s;
    return avar_block_term(c, x, k, cfg, m);
  };
  const double f0 = at(0.0), f1 = at(1.0), f4 = at(4.0), f16 = at(16.0);
  // fit c0 + c1 s + c2 s^2 through s = 0, 1, 4 and predict s = 16
  const double c0 = f0;
  const double c2 = ((f4 - c0) / 4.0 - (f1 - c0)) / 3.0;
  const double c1 = f1 - c0 - c2;
  CHECK(f16 == doctest::Approx(c0 + 16 * c1 + 256 * c2).epsilon(1e-9));
  CHECK(c1 > 0.0);
  CHECK(c2 > 0.0);
}

TEST_CASE("exact linearity end to end") {
  const int m = 2340;
  const auto cfg = tuning_from_m(m).with_infinite_thresholds();
  const auto& k = default_kernel();
  for (double beta : {-0.7, 0.3, 1.5}) {
    const auto [y1, y2] = affine_day(m, beta, 0.25, 17);
    const DayView d{y1, y2};
    const auto r = rib_day(d, cfg, k);
    for (const auto& b : r.blocks) CHECK(std::abs(b.beta - beta) < 1e-10);
    const int nb = preavg::block_count(m, cfg.b_m);
    CHECK(r.coverage == doctest::Approx(static_cast<double>(m) / (nb * cfg.b_m)));
    CHECK(std::abs(r.rib - beta) < 1e-10);
    auto raw = cfg;
    raw.coverage_renormalization = false;
    CHECK(std::abs(rib_day(d, raw, k).rib - beta * nb * cfg.b_m / m) < 1e-10);
    CHECK(std::abs(chen_day(d, cfg, k) - beta) < 1e-10);
    CHECK(std::abs(prvb_day(d, cfg, k) - beta) < 1e-10);
  }
}

TEST_CASE("avar of a perfectly correlated noiseless block is zero") {
  const int m = 2340;
  std::vector<double> y1(static_cast<std::size_t>(m) + 1);
  RandomStream rs(3);
  for (int j = 1; j <= m; ++j) y1[static_cast<std::size_t>(j)] = y1[static_cast<std::size_t>(j - 1)] + 0.01 * rs.normal();
  std::vector<double> y2(y1.size());
  for (std::size_t j = 0; j < y1.size(); ++j) y2[j] = 1.5 * y1[j];
  preavg::SpotCovEstimate c;
  c.sigma11 = c.sigma11_floored = 0.04;
  c.sigma12 = 0.06;
  c.sigma22 = 0.09;
  preavg::NoiseMomentEstimate n;
  CHECK(avar_block_term(c, n, default_kernel(), tuning_from_m(m), m) == doctest::Approx(0.0).scale(1e-12));
}

TEST_CASE("avar is invariant to level shifts") {
  const int m = 2340;
  const auto o = sim::simulate({}, {}, {}, {m, 1}, {}, 5);
  auto y1 = o.observed.x1(), y2 = o.observed.x2();
  const auto cfg = tuning_from_m(m);
  const double a = rib_avar_day({y1, y2}, cfg, default_kernel());
  for (auto& v : y1) v += 0.5;
  for (auto& v : y2) v -= 3.0;
  const double b = rib_avar_day({y1, y2}, cfg, default_kernel());
  CHECK(b == doctest::Approx(a).epsilon(1e-9));
  CHECK(a >= 0.0);
}

TEST_CASE("series over days") {
  const int m = 2340;
  const auto o = sim::simulate({}, {}, {}, {m, 4}, {}, 8);
  const auto all = estimate_series(o.observed, default_tuning(), default_kernel(),
                                   {Estimator::rib, Estimator::chen, Estimator::prvb});
  REQUIRE(all.size() == 3);
  for (const auto& s : all) {
    CHECK(s.size() == 4);
    CHECK(s.failures.empty());
  }
  CHECK(std::isnan(all[1].avar[0]));
  // one day alone gives the same estimate
  const auto one = rib_day(o.observed.day(2), tuning_from_m(m), default_kernel());
  CHECK(one.rib == all[0].rib[2]);
  CHECK(one.avar == all[0].avar[2]);
  // permuting days permutes outputs
  const auto perm = o.observed.select_days({3, 1, 0, 2});
  const auto ps = rib_series(perm, default_tuning(), default_kernel());
  CHECK(ps.rib[0] == all[0].rib[3]);
  CHECK(ps.rib[3] == all[0].rib[2]);
  // threading does not change results
  const auto threaded = rib_series(o.observed, default_tuning(), default_kernel(), 3);
  CHECK(threaded.rib == all[0].rib);
}

TEST_CASE("estimator names") {
  CHECK(estimator_from_string("chen") == Estimator::chen);
  CHECK(to_string(Estimator::prvb) == "PRVB");
  CHECK_THROWS_AS(estimator_from_string("xyz"), InvalidArgument);
}

TEST_CASE("RIB tracks the true integrated beta") {
  const int m = 4680, n = 20;
  const auto o = sim::simulate({}, {}, {}, {m, n}, {}, 2024);
  const auto s = rib_series(o.observed, default_tuning(), default_kernel());
  std::vector<double> err;
  for (int i = 0; i < n; ++i) err.push_back(s.rib[static_cast<std::size_t>(i)] - o.true_ibeta[static_cast<std::size_t>(i)]);
  CHECK(std::abs(stats::mean(err)) < 4.0 * stats::standard_error(err) + 0.05);
  CHECK(stats::sd(err) < 0.5 * stats::sd(o.true_ibeta) + 0.3);
}
