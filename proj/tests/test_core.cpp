#include <doctest.h>

#include <cmath>

#include "drbeta/core.hpp"

using namespace drbeta;

namespace {

// Plain midpoint rule on a fine grid; independent of the library's Simpson.
double midpoint(const std::function<double(double)>& f, int n = 200000) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f((i + 0.5) / n);
  return s / n;
}

}  // namespace

TEST_CASE("triangular kernel constants") {
  const auto k = kernel_constants(triangular_kernel());
  const double psi0 = midpoint([](double x) { const double g = std::min(x, 1 - x); return g * g; });
  CHECK(psi0 == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
  CHECK(k.psi0 == doctest::Approx(psi0).epsilon(1e-9));
  CHECK(k.psi1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.phi00 == doctest::Approx(TriangularConstants::phi00).epsilon(1e-9));
  CHECK(k.phi01 == doctest::Approx(TriangularConstants::phi01).epsilon(1e-9));
  CHECK(k.phi11 == doctest::Approx(TriangularConstants::phi11).epsilon(1e-9));
}

TEST_CASE("overlap integrals against brute-force double quadrature") {
  // phi0(s) = int g(u) g(u-s) du, phi1(s) = int g'(u) g'(u-s) du
  auto g = [](double x) { return (x <= 0 || x >= 1) ? 0.0 : std::min(x, 1 - x); };
  auto gp = [](double x) { return (x <= 0 || x >= 1) ? 0.0 : (x < 0.5 ? 1.0 : -1.0); };
  const int n = 2000;
  double p00 = 0, p01 = 0, p11 = 0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    double a = 0, b = 0;
    for (int j = 0; j < n; ++j) {
      const double u = (j + 0.5) / n;
      a += g(u) * g(u - s);
      b += gp(u) * gp(u - s);
    }
    a /= n;
    b /= n;
    p00 += a * a;
    p01 += a * b;
    p11 += b * b;
  }
  p00 /= n;
  p01 /= n;
  p11 /= n;
  const auto& k = default_kernel();
  CHECK(k.phi00 == doctest::Approx(p00).epsilon(1e-4));
  CHECK(k.phi01 == doctest::Approx(p01).epsilon(1e-4));
  CHECK(k.phi11 == doctest::Approx(p11).epsilon(1e-3));
}

TEST_CASE("kernel constants stable under doubling of quadrature points") {
  WeightFunction smooth{"sine", [](double x) { return std::sin(M_PI * x); }, {}, {}};
  for (const auto& g : {triangular_kernel(), smooth}) {
    const auto a = kernel_constants(g, 2049);
    const auto b = kernel_constants(g, 4097);
    CHECK(std::abs(a.psi0 - b.psi0) < 1e-8);
    CHECK(std::abs(a.psi1 - b.psi1) < 1e-8);
    CHECK(std::abs(a.phi00 - b.phi00) < 1e-8);
    CHECK(std::abs(a.phi01 - b.phi01) < 1e-8);
    CHECK(std::abs(a.phi11 - b.phi11) < 1e-8);
  }
}

TEST_CASE("degenerate kernel rejected") {
  WeightFunction zero{"zero", [](double) { return 0.0; }, {}, {}};
  CHECK_THROWS_AS(kernel_constants(zero), InvalidArgument);
  WeightFunction bad{"bad", [](double x) { return 1.0 + x; }, {}, {}};
  bad.g = [](double x) { return 1.0 + x; };
  // operator() forces the boundary to zero, so the check is on g itself
  CHECK_THROWS_AS(kernel_constants(bad), InvalidArgument);
}

TEST_CASE("discrete phi weights") {
  const auto g = triangular_kernel();
  auto brute = [&](int k, int d) {
    double s = 0.0;
    for (int i = -k - 2; i <= 2 * k + 2; ++i) {
      s += (g((i + 1.0) / k) - g(static_cast<double>(i) / k)) *
           (g((i - d + 1.0) / k) - g(static_cast<double>(i - d) / k));
    }
    return k * s;
  };
  for (int k : {2, 3, 8, 38}) {
    const int kp = 3;
    const auto phi = discrete_phi_weights(k, kp, g);
    REQUIRE(phi.size() == static_cast<std::size_t>(2 * kp + 1));
    for (int d = -kp; d <= kp; ++d) {
      CHECK(phi[static_cast<std::size_t>(d + kp)] == doctest::Approx(brute(k, d)).epsilon(1e-12));
      CHECK(phi[static_cast<std::size_t>(d + kp)] == phi[static_cast<std::size_t>(-d + kp)]);
      CHECK(std::abs(phi[static_cast<std::size_t>(d + kp)]) <= phi[static_cast<std::size_t>(kp)] + 1e-15);
    }
    if (k % 2 == 0) CHECK(phi[static_cast<std::size_t>(kp)] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // k = 2: increments of g over the grid are (1/2, -1/2); phi_1 = 2 * (1/2 * -1/2) = -1/2
  CHECK(discrete_phi_weights(2, 1, g)[2] == doctest::Approx(-0.5));
}

TEST_CASE("phi weights telescope to zero over all lags") {
  WeightFunction smooth{"sine", [](double x) { return std::sin(M_PI * x); }, {}, {}};
  for (const auto& g : {triangular_kernel(), smooth}) {
    for (int k : {2, 5, 12}) {
      const auto phi = discrete_phi_weights(k, k + 1, g);
      double s = 0.0;
      for (double v : phi) s += v;
      CHECK(std::abs(s) < 1e-12);
    }
  }
}

TEST_CASE("tuning defaults") {
  const auto c = tuning_from_m(23400);
  CHECK(c.k_m == 122);
  CHECK(c.l_m == 4);
  CHECK(c.k_prime_m == 3);
  CHECK(c.b_m == static_cast<int>(std::floor(std::pow(23400.0, 0.7))));
  CHECK(2 * c.k_m < c.b_m);
  CHECK(c.delta_m == 1e-5);
  CHECK(c.varpi1 == 0.47);
  CHECK(c.varpi2 == 0.15);

  const auto d = tuning_from_m(2340);
  CHECK(d.k_m == 38);
  CHECK(d.b_m == 228);
  CHECK(d.l_m == 3);
  CHECK(d.k_prime_m == 2);
}

TEST_CASE("tuning is monotone in m") {
  TuningConfig prev = tuning_from_m(100);
  for (int m = 101; m <= 30000; m += 37) {
    const auto c = tuning_from_m(m);
    CHECK(c.k_m >= prev.k_m);
    CHECK(c.b_m >= prev.b_m);
    CHECK(c.l_m >= prev.l_m);
    CHECK(c.k_prime_m >= prev.k_prime_m);
    prev = c;
  }
}

TEST_CASE("tuning overrides are validated") {
  CHECK_THROWS_AS(tuning_from_m(50), InvalidArgument);
  CHECK_THROWS_WITH_AS(tuning_from_m(2340, {{"l_m", 40}}), doctest::Contains("6"), InvalidArgument);
  CHECK_THROWS_AS(tuning_from_m(2340, {{"no_such_key", 1}}), InvalidArgument);
  CHECK_THROWS_AS(tuning_from_m(2340, {{"delta_m", 0.0}}), InvalidArgument);
  const auto c = tuning_from_m(2340, {{"b_m", 300}});
  CHECK(c.b_m == 300);
}

TEST_CASE("tuning json round trip") {
  const auto c = tuning_from_m(4680);
  nlohmann::json j = c;
  const auto back = j.get<TuningConfig>();
  CHECK(back.k_m == c.k_m);
  CHECK(back.b_m == c.b_m);
  CHECK(back.threshold_mode == c.threshold_mode);
  CHECK(std::isinf(back.u1));
}

TEST_CASE("price panel layout") {
  std::vector<double> x(2 * 4 + 1), y(2 * 4 + 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    y[i] = 2.0 * static_cast<double>(i);
  }
  const auto p = PricePanel::contiguous({4, 2}, x, y, PanelKind::latent);
  CHECK(p.n_days() == 2);
  CHECK(p.day(1).y1.front() == 4.0);
  CHECK(p.day(1).y1.back() == 8.0);
  CHECK(p.day(1).m() == 4);
  CHECK(p.grid().dt() * p.grid().m == 1.0);
  CHECK_THROWS_AS(PricePanel::contiguous({4, 2}, x, {1.0}, PanelKind::latent), InvalidArgument);
}
