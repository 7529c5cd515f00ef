#include "drbeta/sim.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "drbeta/rng.hpp"

namespace drbeta::sim {

namespace {

constexpr double kDivergence = 1e6;
constexpr double kSigma2Floor = 1e-12;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + " must be finite");
  }
}

double sum_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

struct Chol2 {
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

// Lower factor of a 2x2 symmetric PSD matrix; tolerates singular input.
Chol2 chol2(const Eigen::Matrix2d& m) {
  Chol2 c;
  c.l11 = std::sqrt(std::max(0.0, m(0, 0)));
  c.l21 = c.l11 > 0.0 ? m(1, 0) / c.l11 : 0.0;
  c.l22 = std::sqrt(std::max(0.0, m(1, 1) - c.l21 * c.l21));
  return c;
}

double spectral_radius(const Eigen::Matrix2d& a) {
  Eigen::EigenSolver<Eigen::Matrix2d> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double draw_jump(RandomStream& rs, const JumpSizeParams& jp) {
  const double j2 = std::max(jp.mean + jp.sd * rs.normal(), jp.floor);
  const double size = std::sqrt(j2);
  return rs.uniform() < 0.5 ? -size : size;
}

// Spot beta within one day, written in the integrated form
// beta_t = beta_{n-1} + s^2 A_n - s (omega2 + beta_{n-1})
//          + alpha_1 int_{n-1}^t beta + nu (1 - s) (Z_t - Z_{n-1}),
// with the integral accumulated by left-endpoint sums.
class BetaStepper {
 public:
  BetaStepper(const DRBetaParams& dr, double beta0)
      : dr_(dr), pre_sample_(beta0) {
    beta_close_.push_back(beta0);
    beta_ = beta0;
  }

  void begin_day() {
    const int n = static_cast<int>(ibeta_.size()) + 1;
    a_n_ = drift_level(n);
    open_ = beta_close_.back();
    s_ = 0.0;
    integral_ = 0.0;
    z_ = 0.0;
    beta_ = open_;
  }

  // Advances by `h` (day fraction) with Brownian increment dz.
  void step(double h, double dz) {
    integral_ += beta_ * h;
    s_ += h;
    z_ += dz;
    const double a1 = dr_.alpha.empty() ? 0.0 : dr_.alpha[0];
    beta_ = open_ + s_ * s_ * a_n_ - s_ * (dr_.omega2 + open_) + a1 * integral_ +
            dr_.nu * (1.0 - s_) * z_;
    if (!std::isfinite(beta_) || std::abs(beta_) > kDivergence) {
      throw ComputationError("simulate: spot beta diverged (|beta| > 1e6)");
    }
  }

  // Closes the day; `s` is snapped to 1 so the close satisfies the
  // low-frequency relation exactly.
  void end_day() {
    const double a1 = dr_.alpha.empty() ? 0.0 : dr_.alpha[0];
    beta_ = open_ + a_n_ - (dr_.omega2 + open_) + a1 * integral_;
    beta_close_.push_back(beta_);
    ibeta_.push_back(integral_);
  }

  double beta() const { return beta_; }
  double pre_sample() const { return pre_sample_; }
  const std::vector<double>& beta_close() const { return beta_close_; }
  const std::vector<double>& ibeta() const { return ibeta_; }

 private:
  double drift_level(int n) const {
    double a = dr_.omega1;
    for (int i = 1; i <= dr_.p(); ++i) {
      const int k = n - i;
      a += dr_.gamma[static_cast<std::size_t>(i - 1)] *
           (k >= 0 ? beta_close_[static_cast<std::size_t>(k)] : pre_sample_);
    }
    for (int j = 2; j <= dr_.q(); ++j) {
      const int day = n + 1 - j;
      a += dr_.alpha[static_cast<std::size_t>(j - 1)] *
           (day >= 1 ? ibeta_[static_cast<std::size_t>(day - 1)] : pre_sample_);
    }
    return a;
  }

  const DRBetaParams& dr_;
  double pre_sample_;
  std::vector<double> beta_close_;
  std::vector<double> ibeta_;
  double a_n_ = 0.0, open_ = 0.0, s_ = 0.0, integral_ = 0.0, z_ = 0.0;
  double beta_ = 0.0;
};

Eigen::Vector2d stationary_draw(RandomStream& rs, const Eigen::Matrix2d& cov) {
  const Chol2 c = chol2(cov);
  const double z1 = rs.normal(), z2 = rs.normal();
  return {c.l11 * z1, c.l21 * z1 + c.l22 * z2};
}

}  // namespace

void DRBetaParams::validate() const {
  for (double v : {omega1, omega2, nu, rho, beta_d}) require_finite(v, "DRBetaParams entry");
  for (double v : gamma) require_finite(v, "gamma");
  for (double v : alpha) require_finite(v, "alpha");
  if (sum_abs(gamma) >= 1.0) {
    std::ostringstream os;
    os << "DRBetaParams: sum |gamma_i| = " << sum_abs(gamma) << " must be < 1";
    throw InvalidArgument(os.str());
  }
  if (std::abs(rho) > 1.0) throw InvalidArgument("DRBetaParams: |rho| must be <= 1");
  if (nu < 0.0) throw InvalidArgument("DRBetaParams: nu must be >= 0");
}

void VolParams::validate() const {
  for (double v : {omega1_t, omega2_t, gamma_t, alpha_t, beta_t, nu_t, rho_t, q_const,
                   lambda1, lambda2}) {
    require_finite(v, "VolParams entry");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw InvalidArgument("VolParams: jump intensities must be >= 0");
  }
  if (jump1.floor <= 0.0 || jump2.floor <= 0.0) {
    throw InvalidArgument("VolParams: jump-size floors must be > 0");
  }
  if (jump1.sd < 0.0 || jump2.sd < 0.0) {
    throw InvalidArgument("VolParams: jump-size sd must be >= 0");
  }
  if (q_const < 0.0) throw InvalidArgument("VolParams: q_const must be >= 0");
  if (std::abs(rho_t) > 1.0) throw InvalidArgument("VolParams: |rho_t| must be <= 1");
}

void NoiseParams::validate() const {
  for (double v : {mean_rev, s1, s2, diurnal_amp, theta2_load_b, theta2_load_w}) {
    require_finite(v, "NoiseParams entry");
  }
  if (s1 < 0.0 || s2 < 0.0) throw InvalidArgument("NoiseParams: scales must be >= 0");
  if (!ar_coeff.allFinite() || !innov_cov.allFinite()) {
    throw InvalidArgument("NoiseParams: non-finite matrix entry");
  }
  if (spectral_radius(ar_coeff) >= 1.0) {
    std::ostringstream os;
    os << "NoiseParams: spectral radius of ar_coeff = " << spectral_radius(ar_coeff)
       << " must be < 1";
    throw InvalidArgument(os.str());
  }
  if (std::abs(innov_cov(0, 1) - innov_cov(1, 0)) > 1e-14) {
    throw InvalidArgument("NoiseParams: innov_cov must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(innov_cov);
  if (es.eigenvalues().minCoeff() < -1e-14) {
    throw InvalidArgument("NoiseParams: innov_cov must be positive semi-definite");
  }
}

NoiseParams NoiseParams::none() {
  NoiseParams n;
  n.s1 = 0.0;
  n.s2 = 0.0;
  return n;
}

RhoCoefficients rho_coefficients(double a) {
  require_finite(a, "alpha_1");
  RhoCoefficients r;
  if (std::abs(a) < 1e-3) {
    // e^a expansions: sum a^k/(k+1)!, a^k/(k+2)!, a^k/(k+3)!
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, pw = 1.0, f = 1.0;
    for (int k = 0; k < 8; ++k) {
      t1 += pw / (f * (k + 1));
      t2 += pw / (f * (k + 1) * (k + 2));
      t3 += pw / (f * (k + 1) * (k + 2) * (k + 3));
      pw *= a;
      f *= (k + 1);
    }
    r.r1 = t1;
    r.r2 = t2;
    r.r3 = t3;
  } else {
    const double em1 = std::expm1(a);
    r.r1 = em1 / a;
    r.r2 = (em1 - a) / (a * a);
    r.r3 = (em1 - a - 0.5 * a * a) / (a * a * a);
  }
  return r;
}

double conditional_ibeta(const DRBetaParams& dr, const std::vector<double>& beta_close,
                         const std::vector<double>& ibeta, int day, double pre_sample) {
  if (day < 1 || static_cast<std::size_t>(day) > beta_close.size()) {
    throw InvalidArgument("conditional_ibeta: day out of range");
  }
  auto b = [&](int k) {
    return k >= 0 ? beta_close[static_cast<std::size_t>(k)] : pre_sample;
  };
  auto ib = [&](int d) {
    return (d >= 1 && static_cast<std::size_t>(d) <= ibeta.size())
               ? ibeta[static_cast<std::size_t>(d - 1)]
               : pre_sample;
  };
  double a_n = dr.omega1;
  for (int i = 1; i <= dr.p(); ++i) a_n += dr.gamma[static_cast<std::size_t>(i - 1)] * b(day - i);
  for (int j = 2; j <= dr.q(); ++j) {
    a_n += dr.alpha[static_cast<std::size_t>(j - 1)] * ib(day + 1 - j);
  }
  const RhoCoefficients r = rho_coefficients(dr.alpha.empty() ? 0.0 : dr.alpha[0]);
  const double open = b(day - 1);
  return r.r1 * open - r.r2 * (dr.omega2 + open) + 2.0 * r.r3 * a_n;
}

Eigen::Matrix2d stationary_covariance(const Eigen::Matrix2d& ar,
                                      const Eigen::Matrix2d& innov_cov) {
  if (spectral_radius(ar) >= 1.0) {
    throw InvalidArgument("stationary_covariance: ar matrix is not stable");
  }
  // S - A S A' = Q, unknowns ordered column-major
  Eigen::Matrix4d lhs = Eigen::Matrix4d::Identity();
  Eigen::Vector4d q;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const int row = r + 2 * c;
      q(row) = innov_cov(r, c);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) lhs(row, i + 2 * j) -= ar(r, i) * ar(c, j);
    }
  }
  const Eigen::Vector4d v = lhs.fullPivLu().solve(q);
  Eigen::Matrix2d s;
  s << v(0), v(2), v(1), v(3);
  return 0.5 * (s + s.transpose());
}

SimOutput simulate(const DRBetaParams& dr, const VolParams& vol, const NoiseParams& noise,
                   TimeGrid grid, const InitialState& init, std::uint64_t seed,
                   const SimOptions& options) {
  dr.validate();
  vol.validate();
  noise.validate();
  if (grid.m < 100) throw InvalidArgument("simulate: grid.m must be >= 100");
  if (grid.n_days < 1) throw InvalidArgument("simulate: n_days must be >= 1");
  if (options.refinement < 1) throw InvalidArgument("simulate: refinement must be >= 1");
  if (!(init.sigma2_0 > 0.0)) throw InvalidArgument("simulate: sigma2_0 must be > 0");

  RandomStream diff(seed, 0, "diffusion");
  RandomStream jumps(seed, 0, "jumps");
  RandomStream nrs(seed, 0, "noise");

  const int m = grid.m;
  const int r = options.refinement;
  const std::size_t total = static_cast<std::size_t>(grid.n_days) * static_cast<std::size_t>(m) + 1;
  const double dt = 1.0 / static_cast<double>(m);
  const double h = dt / static_cast<double>(r);
  const double sqh = std::sqrt(h);
  const double rho_z = dr.rho, rho_zc = std::sqrt(1.0 - dr.rho * dr.rho);
  const double rho_b = vol.rho_t, rho_bc = std::sqrt(1.0 - vol.rho_t * vol.rho_t);
  const double p1 = vol.lambda1 * h, p2 = vol.lambda2 * h;

  SimOutput out;
  out.seed = seed;
  std::vector<double> x1(total), x2(total), y1(total), y2(total);
  if (options.store_spot_beta) out.spot_beta.resize(total);

  const Chol2 innov = chol2(noise.innov_cov);
  Eigen::Vector2d chi = stationary_draw(nrs, stationary_covariance(noise.ar_coeff, noise.innov_cov));
  double theta1 = noise.s1 * (1.0 + noise.diurnal_amp);
  double theta2 = noise.s2 * (1.0 + noise.diurnal_amp);

  BetaStepper beta(dr, init.beta0);
  double sigma2 = init.sigma2_0;
  double c1 = init.x1_0, c2 = init.x2_0;

  auto record = [&](std::size_t idx) {
    x1[idx] = c1;
    x2[idx] = c2;
    y1[idx] = c1 + theta1 * chi(0);
    y2[idx] = c2 + theta2 * chi(1);
    if (options.store_spot_beta) out.spot_beta[idx] = beta.beta();
  };
  record(0);

  const double two_pi = 2.0 * std::numbers::pi;
  for (int day = 0; day < grid.n_days; ++day) {
    beta.begin_day();
    const double sigma2_open = sigma2;
    double zt = 0.0;  // B~_t - B~_{day start}
    for (int j = 0; j < m; ++j) {
      for (int sub = 0; sub < r; ++sub) {
        const double s = (static_cast<double>(j) + static_cast<double>(sub) / r) * dt;
        const double t = static_cast<double>(day) + s;
        const double db = sqh * diff.normal();
        const double dw = sqh * diff.normal();
        const double dz = rho_z * db + rho_zc * sqh * diff.normal();
        const double dbt = rho_b * db + rho_bc * sqh * diff.normal();

        double j1 = 0.0, j2 = 0.0;
        if (jumps.bernoulli(p1)) {
          j1 = draw_jump(jumps, vol.jump1);
          ++out.counters.jumps1;
        }
        if (jumps.bernoulli(p2)) {
          j2 = draw_jump(jumps, vol.jump2);
          ++out.counters.jumps2;
        }

        const double b = beta.beta();
        const double sigma = std::sqrt(sigma2);
        const double dx1c = sigma * db;
        c1 += dx1c + j1;
        c2 += b * dx1c + dr.beta_d * j1 + vol.q_const * dw + j2;

        const double drift =
            2.0 * vol.gamma_t * s * (vol.omega1_t + sigma2_open) -
            (vol.omega2_t + sigma2_open) + vol.alpha_t * sigma2 - vol.nu_t * zt * zt;
        sigma2 += drift * h + vol.beta_t * j1 * j1 + 2.0 * vol.nu_t * (1.0 - s) * zt * dbt;
        zt += dbt;
        if (!std::isfinite(sigma2) || sigma2 > kDivergence) {
          throw ComputationError("simulate: sigma^2 diverged (> 1e6)");
        }
        if (sigma2 < kSigma2Floor) {
          sigma2 = kSigma2Floor;
          ++out.counters.sigma2_clamps;
        }

        const double season = 1.0 + noise.diurnal_amp * std::cos(two_pi * t);
        theta1 += noise.mean_rev * (noise.s1 * season - theta1) * h + noise.s1 * db;
        theta2 += noise.mean_rev * (noise.s2 * season - theta2) * h +
                  noise.s2 * (noise.theta2_load_b * db + noise.theta2_load_w * dw);
        if (theta1 < 0.0) {
          theta1 = 0.0;
          ++out.counters.theta_clamps;
        }
        if (theta2 < 0.0) {
          theta2 = 0.0;
          ++out.counters.theta_clamps;
        }

        beta.step(h, dz);
      }
      if (j == m - 1) beta.end_day();
      const double e1 = nrs.normal(), e2 = nrs.normal();
      chi = noise.ar_coeff * chi +
            Eigen::Vector2d(innov.l11 * e1, innov.l21 * e1 + innov.l22 * e2);
      record(static_cast<std::size_t>(day) * static_cast<std::size_t>(m) +
             static_cast<std::size_t>(j) + 1);
    }
  }

  out.true_ibeta = beta.ibeta();
  out.beta_close = beta.beta_close();
  out.true_h.resize(static_cast<std::size_t>(grid.n_days));
  for (int d = 1; d <= grid.n_days; ++d) {
    out.true_h[static_cast<std::size_t>(d - 1)] =
        conditional_ibeta(dr, out.beta_close, out.true_ibeta, d, init.beta0);
  }
  out.next_h = conditional_ibeta(dr, out.beta_close, out.true_ibeta, grid.n_days + 1, init.beta0);
  out.latent = PricePanel::contiguous(grid, std::move(x1), std::move(x2), PanelKind::latent);
  out.observed = PricePanel::contiguous(grid, std::move(y1), std::move(y2), PanelKind::observed);
  return out;
}

BetaPath simulate_beta(const DRBetaParams& dr, int steps_per_day, int n_days, double beta0,
                       std::uint64_t seed, bool keep_path) {
  dr.validate();
  if (steps_per_day < 1 || n_days < 1) {
    throw InvalidArgument("simulate_beta: steps_per_day and n_days must be >= 1");
  }
  RandomStream rs(seed, 0, "beta");
  const double h = 1.0 / static_cast<double>(steps_per_day);
  const double sqh = std::sqrt(h);
  BetaStepper beta(dr, beta0);
  BetaPath out;
  if (keep_path) {
    out.spot.reserve(static_cast<std::size_t>(n_days) * static_cast<std::size_t>(steps_per_day) + 1);
    out.spot.push_back(beta0);
  }
  for (int day = 0; day < n_days; ++day) {
    beta.begin_day();
    for (int j = 0; j < steps_per_day; ++j) {
      beta.step(h, sqh * rs.normal());
      if (j == steps_per_day - 1) beta.end_day();
      if (keep_path) out.spot.push_back(beta.beta());
    }
  }
  out.ibeta = beta.ibeta();
  out.beta_close = beta.beta_close();
  out.h.resize(static_cast<std::size_t>(n_days));
  for (int d = 1; d <= n_days; ++d) {
    out.h[static_cast<std::size_t>(d - 1)] =
        conditional_ibeta(dr, out.beta_close, out.ibeta, d, beta0);
  }
  out.next_h = conditional_ibeta(dr, out.beta_close, out.ibeta, n_days + 1, beta0);
  return out;
}

NoiseSeries simulate_noise_series(const NoiseParams& noise, int length, std::uint64_t seed,
                                  double dt) {
  noise.validate();
  if (length < 1) throw InvalidArgument("simulate_noise_series: length must be >= 1");
  if (!(dt > 0.0)) throw InvalidArgument("simulate_noise_series: dt must be > 0");
  RandomStream drivers(seed, 0, "noise-scale");
  RandomStream rs(seed, 0, "noise");
  const Chol2 innov = chol2(noise.innov_cov);
  Eigen::Vector2d chi = stationary_draw(rs, stationary_covariance(noise.ar_coeff, noise.innov_cov));
  double theta1 = noise.s1 * (1.0 + noise.diurnal_amp);
  double theta2 = noise.s2 * (1.0 + noise.diurnal_amp);
  const double sq = std::sqrt(dt);
  const double two_pi = 2.0 * std::numbers::pi;

  NoiseSeries out;
  const auto n = static_cast<std::size_t>(length);
  for (auto* v : {&out.eps1, &out.eps2, &out.theta1, &out.theta2, &out.chi1, &out.chi2}) {
    v->resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double t = static_cast<double>(i - 1) * dt;
      const double season = 1.0 + noise.diurnal_amp * std::cos(two_pi * t);
      const double db = sq * drivers.normal(), dw = sq * drivers.normal();
      theta1 += noise.mean_rev * (noise.s1 * season - theta1) * dt + noise.s1 * db;
      theta2 += noise.mean_rev * (noise.s2 * season - theta2) * dt +
                noise.s2 * (noise.theta2_load_b * db + noise.theta2_load_w * dw);
      if (theta1 < 0.0) {
        theta1 = 0.0;
        ++out.clamps;
      }
      if (theta2 < 0.0) {
        theta2 = 0.0;
        ++out.clamps;
      }
      const double e1 = rs.normal(), e2 = rs.normal();
      chi = noise.ar_coeff * chi +
            Eigen::Vector2d(innov.l11 * e1, innov.l21 * e1 + innov.l22 * e2);
    }
    out.theta1[i] = theta1;
    out.theta2[i] = theta2;
    out.chi1[i] = chi(0);
    out.chi2[i] = chi(1);
    out.eps1[i] = theta1 * chi(0);
    out.eps2[i] = theta2 * chi(1);
  }
  return out;
}

std::vector<double> true_integrated_beta(const std::vector<double>& path, TimeGrid grid) {
  if (grid.m < 1 || grid.n_days < 1) throw InvalidArgument("true_integrated_beta: empty grid");
  const std::size_t m = static_cast<std::size_t>(grid.m);
  if (path.size() != static_cast<std::size_t>(grid.n_days) * m + 1) {
    throw InvalidArgument("true_integrated_beta: path length must be n_days*m+1");
  }
  std::vector<double> out(static_cast<std::size_t>(grid.n_days));
  for (std::size_t d = 0; d < out.size(); ++d) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += path[d * m + j];
    out[d] = s / static_cast<double>(m);
  }
  return out;
}

namespace {

template <class F>
double simpson01(F f, int points) {
  if (points < 3) throw InvalidArgument("quadrature_points must be >= 3");
  int n = points - 1;
  if (n % 2) ++n;
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

double d_variance_oracle(double a, double nu, int quadrature_points) {
  if (a == 0.0) throw InvalidArgument("d_variance_oracle: alpha1 must be nonzero");
  const double integral = simpson01(
      [a](double t) {
        const double v = a * (1.0 - t - 1.0 / a) * std::exp(a * (1.0 - t)) + 1.0;
        return v * v * t;
      },
      quadrature_points);
  return 4.0 * nu * nu * integral / std::pow(a, 4);
}

double d_variance_isometry(double a, double nu, int quadrature_points) {
  if (a == 0.0) throw InvalidArgument("d_variance_isometry: alpha1 must be nonzero");
  const double integral = simpson01(
      [a](double u) {
        const double v = a * (u - 1.0 / a) * std::exp(a * u) + 1.0;
        return v * v;
      },
      quadrature_points);
  return nu * nu * integral / std::pow(a, 4);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json mat_to_json(const Eigen::Matrix2d& m) {
  return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
}

Eigen::Matrix2d mat_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw InvalidArgument("expected a 2x2 nested array");
  }
  Eigen::Matrix2d m;
  m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
      j[1][1].get<double>();
  return m;
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                const char* what) {
  if (!j.is_object()) throw InvalidArgument(std::string(what) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw InvalidArgument(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const DRBetaParams& p) {
  j = {{"omega1", p.omega1}, {"omega2", p.omega2}, {"gamma", p.gamma}, {"alpha", p.alpha},
       {"nu", p.nu},         {"rho", p.rho},       {"beta_d", p.beta_d}};
}

void from_json(const nlohmann::json& j, DRBetaParams& p) {
  check_keys(j, {"omega1", "omega2", "gamma", "alpha", "nu", "rho", "beta_d"}, "DRBetaParams");
  read_opt(j, "omega1", p.omega1);
  read_opt(j, "omega2", p.omega2);
  read_opt(j, "gamma", p.gamma);
  read_opt(j, "alpha", p.alpha);
  read_opt(j, "nu", p.nu);
  read_opt(j, "rho", p.rho);
  read_opt(j, "beta_d", p.beta_d);
}

void to_json(nlohmann::json& j, const VolParams& p) {
  auto js = [](const JumpSizeParams& q) {
    return nlohmann::json{{"mean", q.mean}, {"sd", q.sd}, {"floor", q.floor}};
  };
  j = {{"omega1_t", p.omega1_t}, {"omega2_t", p.omega2_t}, {"gamma_t", p.gamma_t},
       {"alpha_t", p.alpha_t},   {"beta_t", p.beta_t},     {"nu_t", p.nu_t},
       {"rho_t", p.rho_t},       {"q_const", p.q_const},   {"lambda1", p.lambda1},
       {"lambda2", p.lambda2},   {"jump1", js(p.jump1)},   {"jump2", js(p.jump2)}};
}

void from_json(const nlohmann::json& j, VolParams& p) {
  check_keys(j,
             {"omega1_t", "omega2_t", "gamma_t", "alpha_t", "beta_t", "nu_t", "rho_t",
              "q_const", "lambda1", "lambda2", "jump1", "jump2"},
             "VolParams");
  read_opt(j, "omega1_t", p.omega1_t);
  read_opt(j, "omega2_t", p.omega2_t);
  read_opt(j, "gamma_t", p.gamma_t);
  read_opt(j, "alpha_t", p.alpha_t);
  read_opt(j, "beta_t", p.beta_t);
  read_opt(j, "nu_t", p.nu_t);
  read_opt(j, "rho_t", p.rho_t);
  read_opt(j, "q_const", p.q_const);
  read_opt(j, "lambda1", p.lambda1);
  read_opt(j, "lambda2", p.lambda2);
  for (auto [key, dst] : {std::pair{"jump1", &p.jump1}, std::pair{"jump2", &p.jump2}}) {
    if (!j.contains(key)) continue;
    const auto& js = j.at(key);
    check_keys(js, {"mean", "sd", "floor"}, key);
    read_opt(js, "mean", dst->mean);
    read_opt(js, "sd", dst->sd);
    read_opt(js, "floor", dst->floor);
  }
}

void to_json(nlohmann::json& j, const NoiseParams& p) {
  j = {{"mean_rev", p.mean_rev},
       {"s1", p.s1},
       {"s2", p.s2},
       {"diurnal_amp", p.diurnal_amp},
       {"theta2_load_b", p.theta2_load_b},
       {"theta2_load_w", p.theta2_load_w},
       {"ar_coeff", mat_to_json(p.ar_coeff)},
       {"innov_cov", mat_to_json(p.innov_cov)}};
}

void from_json(const nlohmann::json& j, NoiseParams& p) {
  check_keys(j,
             {"mean_rev", "s1", "s2", "diurnal_amp", "theta2_load_b", "theta2_load_w",
              "ar_coeff", "innov_cov"},
             "NoiseParams");
  read_opt(j, "mean_rev", p.mean_rev);
  read_opt(j, "s1", p.s1);
  read_opt(j, "s2", p.s2);
  read_opt(j, "diurnal_amp", p.diurnal_amp);
  read_opt(j, "theta2_load_b", p.theta2_load_b);
  read_opt(j, "theta2_load_w", p.theta2_load_w);
  if (j.contains("ar_coeff")) p.ar_coeff = mat_from_json(j.at("ar_coeff"));
  if (j.contains("innov_cov")) p.innov_cov = mat_from_json(j.at("innov_cov"));
}

void to_json(nlohmann::json& j, const InitialState& p) {
  j = {{"beta0", p.beta0}, {"sigma2_0", p.sigma2_0}, {"x1_0", p.x1_0}, {"x2_0", p.x2_0}};
}

void from_json(const nlohmann::json& j, InitialState& p) {
  check_keys(j, {"beta0", "sigma2_0", "x1_0", "x2_0"}, "InitialState");
  read_opt(j, "beta0", p.beta0);
  read_opt(j, "sigma2_0", p.sigma2_0);
  read_opt(j, "x1_0", p.x1_0);
  read_opt(j, "x2_0", p.x2_0);
}

}  // namespace drbeta::sim
