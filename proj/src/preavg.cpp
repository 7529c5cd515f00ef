#include "drbeta/preavg.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "drbeta/stats.hpp"

namespace drbeta::preavg {

namespace {

void check_range(std::span<const double> p, int first, int last, const char* what) {
  if (first < 0 || last >= static_cast<int>(p.size())) {
    std::ostringstream os;
    os << what << ": index range [" << first << ", " << last << "] outside series of length "
       << p.size();
    throw InvalidArgument(os.str());
  }
}

double level_or_inf(double sd, double mult) {
  return sd > 0.0 ? mult * sd : kInf;
}

bool within(double x, double level) { return std::abs(x) <= level; }

}  // namespace

double preaveraged_increment(std::span<const double> p, int l, int k_m, const WeightFunction& g) {
  if (k_m < 2) throw InvalidArgument("preaveraged_increment: k_m must be >= 2");
  check_range(p, l, l + k_m - 1, "preaveraged_increment");
  const double k = static_cast<double>(k_m);
  double s = 0.0;
  for (int j = 1; j < k_m; ++j) {
    s += g(static_cast<double>(j) / k) *
         (p[static_cast<std::size_t>(l + j)] - p[static_cast<std::size_t>(l + j - 1)]);
  }
  return s;
}

double local_average(std::span<const double> p, int l, int l_m) {
  if (l_m < 1) throw InvalidArgument("local_average: l_m must be >= 1");
  check_range(p, l, l + l_m - 1, "local_average");
  double s = 0.0;
  for (int i = 0; i < l_m; ++i) s += p[static_cast<std::size_t>(l + i)];
  return s / static_cast<double>(l_m);
}

double noise_lag_statistic(std::span<const double> p, std::span<const double> q, int l, int d,
                           int l_m) {
  check_range(q, l + d, l + d, "noise_lag_statistic");
  const double a = p[static_cast<std::size_t>(l)] - local_average(p, l + 2 * l_m, l_m);
  const double b = q[static_cast<std::size_t>(l + d)] - local_average(q, l + 4 * l_m, l_m);
  return a * b;
}

double noise_weighted_stat(std::span<const double> p, std::span<const double> q, int l,
                           int l_m, std::span<const double> phi) {
  if (phi.size() % 2 == 0) throw InvalidArgument("noise_weighted_stat: phi needs odd length");
  const int kp = static_cast<int>(phi.size() / 2);
  const double a = p[static_cast<std::size_t>(l)] - local_average(p, l + 2 * l_m, l_m);
  const double qbar = local_average(q, l + 4 * l_m, l_m);
  check_range(q, l - kp, l + kp, "noise_weighted_stat");
  double s = 0.0;
  for (int d = -kp; d <= kp; ++d) {
    s += phi[static_cast<std::size_t>(d + kp)] * (q[static_cast<std::size_t>(l + d)] - qbar);
  }
  return a * s;
}

double noise_lag_sum(std::span<const double> p, std::span<const double> q, int l, int l_m,
                     int k_prime_m) {
  const double a = p[static_cast<std::size_t>(l)] - local_average(p, l + 2 * l_m, l_m);
  const double qbar = local_average(q, l + 4 * l_m, l_m);
  check_range(q, l - k_prime_m, l + k_prime_m, "noise_lag_sum");
  double s = 0.0;
  for (int d = -k_prime_m; d <= k_prime_m; ++d) {
    s += q[static_cast<std::size_t>(l + d)] - qbar;
  }
  return a * s;
}

int block_count(int m, int b_m) {
  if (b_m < 1) throw InvalidArgument("block_count: b_m must be >= 1");
  return m / b_m;
}

NoiseWindow noise_window(int block_start, const TuningConfig& cfg) {
  const int b = cfg.b_m, l = cfg.l_m, kp = cfg.k_prime_m;
  NoiseWindow w;
  w.first = block_start + kp;
  w.count = std::min(b - 6 * l + 1, b - std::max(5 * l, kp + 1) - kp + 1);
  if (w.count < 1) {
    std::ostringstream os;
    os << "noise_window: block of length " << b << " leaves no noise terms (l_m=" << l
       << ", k'_m=" << kp << ")";
    throw InvalidArgument(os.str());
  }
  return w;
}

DayStatistics day_statistics(const DayView& day, const TuningConfig& cfg,
                             const WeightKernel& kernel) {
  const int m = day.m();
  cfg.validate_for(m);
  DayStatistics st;
  st.m = m;
  st.cfg = cfg;
  st.y1.assign(day.y1.begin(), day.y1.end());
  st.y2.assign(day.y2.begin(), day.y2.end());

  const int k = cfg.k_m;
  std::vector<double> gw(static_cast<std::size_t>(k));
  for (int j = 1; j < k; ++j) gw[static_cast<std::size_t>(j)] = kernel.g(static_cast<double>(j) / k);
  const int n_pa = m - k + 2;
  st.pa1.resize(static_cast<std::size_t>(n_pa));
  st.pa2.resize(static_cast<std::size_t>(n_pa));
  for (int l = 0; l < n_pa; ++l) {
    double s1 = 0.0, s2 = 0.0;
    for (int j = 1; j < k; ++j) {
      const auto i = static_cast<std::size_t>(l + j);
      s1 += gw[static_cast<std::size_t>(j)] * (st.y1[i] - st.y1[i - 1]);
      s2 += gw[static_cast<std::size_t>(j)] * (st.y2[i] - st.y2[i - 1]);
    }
    st.pa1[static_cast<std::size_t>(l)] = s1;
    st.pa2[static_cast<std::size_t>(l)] = s2;
  }

  st.phi = discrete_phi_weights(k, cfg.k_prime_m, kernel.g);
  const int lm = cfg.l_m, kp = cfg.k_prime_m;
  std::vector<double> bar1(static_cast<std::size_t>(m + 2 - lm)),
      bar2(static_cast<std::size_t>(m + 2 - lm));
  for (int l = 0; l + lm - 1 <= m; ++l) {
    bar1[static_cast<std::size_t>(l)] = local_average(st.y1, l, lm);
    bar2[static_cast<std::size_t>(l)] = local_average(st.y2, l, lm);
  }
  st.lag_first = kp;
  st.lag_last = m - std::max(5 * lm - 1, kp);
  for (int pr = 0; pr < 3; ++pr) {
    st.ehat[static_cast<std::size_t>(pr)].assign(static_cast<std::size_t>(m + 1), 0.0);
    st.edot[static_cast<std::size_t>(pr)].assign(static_cast<std::size_t>(m + 1), 0.0);
  }
  for (int l = st.lag_first; l <= st.lag_last; ++l) {
    const auto ul = static_cast<std::size_t>(l);
    const double a1 = st.y1[ul] - bar1[ul + 2 * static_cast<std::size_t>(lm)];
    const double a2 = st.y2[ul] - bar2[ul + 2 * static_cast<std::size_t>(lm)];
    const double q1 = bar1[ul + 4 * static_cast<std::size_t>(lm)];
    const double q2 = bar2[ul + 4 * static_cast<std::size_t>(lm)];
    double w1 = 0.0, w2 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int d = -kp; d <= kp; ++d) {
      const double c1 = st.y1[static_cast<std::size_t>(l + d)] - q1;
      const double c2 = st.y2[static_cast<std::size_t>(l + d)] - q2;
      const double ph = st.phi[static_cast<std::size_t>(d + kp)];
      w1 += ph * c1;
      w2 += ph * c2;
      s1 += c1;
      s2 += c2;
    }
    st.ehat[p11][ul] = a1 * w1;
    st.ehat[p12][ul] = a1 * w2;
    st.ehat[p22][ul] = a2 * w2;
    st.edot[p11][ul] = a1 * s1;
    st.edot[p12][ul] = a1 * s2;
    st.edot[p22][ul] = a2 * s2;
  }
  st.thresholds = resolve_thresholds(st);
  return st;
}

Thresholds resolve_thresholds(const DayStatistics& st) {
  const TuningConfig& c = st.cfg;
  Thresholds t;
  switch (c.threshold_mode) {
    case ThresholdMode::absolute:
      t.u1 = c.u1;
      t.u2 = c.u2;
      t.noise_weighted = {c.u11, c.u12, c.u22};
      t.noise_unweighted = {c.a_dot11, c.a_dot12, c.a_dot22};
      break;
    case ThresholdMode::power_law: {
      const double dt = 1.0 / static_cast<double>(st.m);
      const double k = static_cast<double>(c.k_m);
      // levels for k^{-1/2} Y~, converted to the Y~ scale
      const double inc = std::sqrt(k) * std::pow(k * dt, c.varpi1);
      t.u1 = c.u1 * inc;
      t.u2 = c.u2 * inc;
      const double up = std::pow(dt, -c.varpi2), down = std::pow(dt, c.varpi2);
      t.noise_weighted = {c.u11 * up, c.u12 * up, c.u22 * up};
      t.noise_unweighted = {c.a_dot11 * down, c.a_dot12 * down, c.a_dot22 * down};
      break;
    }
    case ThresholdMode::data_driven: {
      t.u1 = level_or_inf(stats::sd(st.pa1), c.price_sd_multiplier);
      t.u2 = level_or_inf(stats::sd(st.pa2), c.price_sd_multiplier);
      if (st.lag_last >= st.lag_first) {
        const auto first = static_cast<std::size_t>(st.lag_first);
        const auto len = static_cast<std::size_t>(st.lag_last - st.lag_first + 1);
        for (std::size_t pr = 0; pr < 3; ++pr) {
          const std::span<const double> e(st.ehat[pr]);
          const std::span<const double> d(st.edot[pr]);
          t.noise_weighted[pr] = level_or_inf(stats::sd(e.subspan(first, len)), c.noise_sd_multiplier);
          t.noise_unweighted[pr] = level_or_inf(stats::sd(d.subspan(first, len)), c.noise_sd_multiplier);
        }
      }
      break;
    }
  }
  return t;
}

namespace {

void check_block(const DayStatistics& st, int block_start) {
  if (block_start < 0 || block_start + st.cfg.b_m > st.m) {
    std::ostringstream os;
    os << "block [" << block_start << ", " << block_start + st.cfg.b_m
       << ") does not fit in a day of " << st.m << " steps";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

SpotCovEstimate spot_covariance(const DayStatistics& st, int block_start,
                                const WeightKernel& kernel) {
  check_block(st, block_start);
  const TuningConfig& c = st.cfg;
  const Thresholds& t = st.thresholds;
  SpotCovEstimate e;
  e.block_start = block_start;

  std::array<double, 3> inc{0.0, 0.0, 0.0};
  const int n_inc = c.b_m - 2 * c.k_m;
  e.truncation.increment_terms = n_inc;
  for (int i = 0; i < n_inc; ++i) {
    const auto l = static_cast<std::size_t>(block_start + i);
    const double a = st.pa1[l], b = st.pa2[l];
    const bool ok1 = within(a, t.u1), ok2 = within(b, t.u2);
    if (ok1) inc[p11] += a * a; else ++e.truncation.increment_clipped[p11];
    if (ok1 && ok2) inc[p12] += a * b; else ++e.truncation.increment_clipped[p12];
    if (ok2) inc[p22] += b * b; else ++e.truncation.increment_clipped[p22];
  }

  std::array<double, 3> corr{0.0, 0.0, 0.0};
  const NoiseWindow w = noise_window(block_start, c);
  e.truncation.noise_terms = w.count;
  for (int i = 0; i < w.count; ++i) {
    const auto l = static_cast<std::size_t>(w.first + i);
    for (std::size_t pr = 0; pr < 3; ++pr) {
      const double v = st.ehat[pr][l];
      if (within(v, t.noise_weighted[pr])) corr[pr] += v;
      else ++e.truncation.noise_clipped[pr];
    }
  }

  const double dt = 1.0 / static_cast<double>(st.m);
  const double k = static_cast<double>(c.k_m);
  const double denom = static_cast<double>(n_inc) * dt * k * kernel.psi0;
  std::array<double, 3> v{};
  for (std::size_t pr = 0; pr < 3; ++pr) v[pr] = (inc[pr] - corr[pr] / k) / denom;
  e.all_truncated = e.truncation.increment_clipped[p11] == n_inc;
  if (e.all_truncated) v = {0.0, 0.0, 0.0};
  e.sigma11 = v[p11];
  e.sigma12 = v[p12];
  e.sigma22 = v[p22];
  e.sigma11_floored = std::max(e.sigma11, c.delta_m);
  return e;
}

NoiseMomentEstimate noise_moments(const DayStatistics& st, int block_start) {
  check_block(st, block_start);
  const TuningConfig& c = st.cfg;
  NoiseMomentEstimate nm;
  nm.block_start = block_start;
  const NoiseWindow w = noise_window(block_start, c);
  nm.terms = w.count;
  std::array<double, 3> s{0.0, 0.0, 0.0};
  for (int i = 0; i < w.count; ++i) {
    const auto l = static_cast<std::size_t>(w.first + i);
    for (std::size_t pr = 0; pr < 3; ++pr) {
      const double v = st.edot[pr][l];
      if (within(v, st.thresholds.noise_unweighted[pr])) s[pr] += v;
      else ++nm.clipped[pr];
    }
  }
  const double norm = static_cast<double>(c.b_m - 6 * c.l_m);
  nm.theta11 = s[p11] / norm;
  nm.theta12 = s[p12] / norm;
  nm.theta22 = s[p22] / norm;
  if (nm.theta11 < 0.0) {
    nm.theta11 = 0.0;
    ++nm.floored;
  }
  if (nm.theta22 < 0.0) {
    nm.theta22 = 0.0;
    ++nm.floored;
  }
  return nm;
}

SpotCovEstimate spot_covariance(const DayView& day, int block_start, const TuningConfig& cfg,
                                const WeightKernel& kernel) {
  return spot_covariance(day_statistics(day, cfg, kernel), block_start, kernel);
}

NoiseMomentEstimate noise_moments(const DayView& day, int block_start, const TuningConfig& cfg,
                                  const WeightKernel& kernel) {
  return noise_moments(day_statistics(day, cfg, kernel), block_start);
}

}  // namespace drbeta::preavg
