#include "drbeta/rib.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <thread>

namespace drbeta::rib {

using preavg::DayStatistics;
using preavg::NoiseMomentEstimate;
using preavg::SpotCovEstimate;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double coverage_factor(int m, const TuningConfig& cfg) {
  if (!cfg.coverage_renormalization) return 1.0;
  const int nb = preavg::block_count(m, cfg.b_m);
  return static_cast<double>(m) / static_cast<double>(nb * cfg.b_m);
}

double debias_formula(double s12, double s11_floor, double th11, double th12,
                      const WeightKernel& kernel, const TuningConfig& cfg, int m) {
  const double ck = cfg.c_k(m);
  const double dt = 1.0 / static_cast<double>(m);
  const double pre = 4.0 / (kernel.psi0 * kernel.psi0 * ck * ck * ck *
                            static_cast<double>(cfg.b_m) * std::sqrt(dt));
  const double s = s11_floor;
  return pre * ((ck * ck * kernel.phi01 / s + kernel.phi11 * th11 / (s * s)) *
                (th11 * s12 / s - th12));
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::rib: return "RIB";
    case Estimator::chen: return "CHEN";
    case Estimator::prvb: return "PRVB";
  }
  return "?";
}

Estimator estimator_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "RIB") return Estimator::rib;
  if (u == "CHEN") return Estimator::chen;
  if (u == "PRVB") return Estimator::prvb;
  throw InvalidArgument("unknown estimator '" + s + "' (expected rib, chen or prvb)");
}

double spot_beta(const SpotCovEstimate& est) { return est.sigma12 / est.sigma11_floored; }

double debias_term(const SpotCovEstimate& est, const NoiseMomentEstimate& nm,
                   const WeightKernel& kernel, const TuningConfig& cfg, int m) {
  return debias_formula(est.sigma12, est.sigma11_floored, nm.theta11, nm.theta12,
                        kernel, cfg, m);
}

double avar_block_term(const SpotCovEstimate& est, const NoiseMomentEstimate& nm,
                       const WeightKernel& kernel, const TuningConfig& cfg, int m) {
  const double ck = cfg.c_k(m);
  const double s = est.sigma11_floored;
  const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
  const double x12 = est.sigma12, x22 = est.sigma22;
  const double t11 = nm.theta11, t12 = nm.theta12, t22 = nm.theta22;
  const double g00 = x22 / s - x12 * x12 / s2;
  const double g01 = t22 / s - 2.0 * x12 * t12 / s2 + x22 * t11 / s2;
  const double g11 = 2.0 * (x12 * t11) * (x12 * t11) / s4 + t11 * t12 / s2 -
                     4.0 * x12 * t11 * t12 / s3 + t11 * t11 / s2;
  return 2.0 * ck / (kernel.psi0 * kernel.psi0) *
         (kernel.phi00 * g00 + kernel.phi01 / (ck * ck) * g01 +
          kernel.phi11 / (ck * ck * ck) * g11);
}

DayResult rib_day(const DayStatistics& st, const WeightKernel& kernel) {
  const TuningConfig& cfg = st.cfg;
  const int nb = preavg::block_count(st.m, cfg.b_m);
  if (nb < 1) throw InvalidArgument("rib_day: day shorter than one block");
  DayResult r;
  r.thresholds = st.thresholds;
  r.coverage = coverage_factor(st.m, cfg);
  double sum = 0.0, sum_r2 = 0.0;
  for (int i = 0; i < nb; ++i) {
    BlockResult b;
    b.cov = preavg::spot_covariance(st, i * cfg.b_m, kernel);
    b.noise = preavg::noise_moments(st, i * cfg.b_m);
    b.beta = spot_beta(b.cov);
    b.debias = debias_term(b.cov, b.noise, kernel, cfg, st.m);
    b.r2 = avar_block_term(b.cov, b.noise, kernel, cfg, st.m);
    if (!(b.r2 >= 0.0)) {
      b.r2 = 0.0;
      b.r2_floored = true;
      ++r.r2_floored;
    }
    sum += b.beta - b.debias;
    sum_r2 += b.r2;
    r.blocks.push_back(b);
  }
  const double bdt = static_cast<double>(cfg.b_m) / static_cast<double>(st.m);
  r.rib = r.coverage * bdt * sum;
  r.avar = r.coverage * r.coverage * bdt * sum_r2;
  return r;
}

DayResult rib_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel) {
  return rib_day(preavg::day_statistics(day, cfg, kernel), kernel);
}

double rib_avar_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel) {
  return rib_day(day, cfg, kernel).avar;
}

namespace {

// 1/2 sum_{r=1}^{k} (g_r - g_{r-1})^2 dY_{j+r} dY_{j+r}', terms past the
// end of the day dropped.
struct IidBias {
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
};

IidBias iid_bias(const DayStatistics& st, const std::vector<double>& w2, int j) {
  IidBias b;
  const int k = st.cfg.k_m;
  for (int r = 1; r <= k && j + r <= st.m; ++r) {
    const auto i = static_cast<std::size_t>(j + r);
    const double d1 = st.y1[i] - st.y1[i - 1], d2 = st.y2[i] - st.y2[i - 1];
    const double w = w2[static_cast<std::size_t>(r)];
    b.b11 += w * d1 * d1;
    b.b12 += w * d1 * d2;
    b.b22 += w * d2 * d2;
  }
  return b;
}

std::vector<double> half_sq_increments(const WeightKernel& kernel, int k) {
  std::vector<double> w2(static_cast<std::size_t>(k + 1), 0.0);
  for (int r = 1; r <= k; ++r) {
    const double d = kernel.g(static_cast<double>(r) / k) - kernel.g(static_cast<double>(r - 1) / k);
    w2[static_cast<std::size_t>(r)] = 0.5 * d * d;
  }
  return w2;
}

double norm_level(const preavg::Thresholds& t) {
  if (std::isinf(t.u1) || std::isinf(t.u2)) return kInf;
  return std::hypot(t.u1, t.u2);
}

}  // namespace

ChenDayResult chen_day_detail(const DayStatistics& st, const WeightKernel& kernel) {
  const TuningConfig& cfg = st.cfg;
  const int m = st.m, k = cfg.k_m, b = cfg.b_m;
  const int nb = preavg::block_count(m, b);
  if (nb < 1) throw InvalidArgument("chen_day: day shorter than one block");
  const std::vector<double> w2 = half_sq_increments(kernel, k);
  const double u = norm_level(st.thresholds);
  const double dt = 1.0 / static_cast<double>(m);
  const double denom = static_cast<double>(b - k) * dt * static_cast<double>(k) * kernel.psi0;

  ChenDayResult out;
  double sum = 0.0;
  for (int blk = 0; blk < nb; ++blk) {
    const int i0 = blk * b;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0;
    for (int l = 0; l <= b - k + 1; ++l) {
      const auto j = static_cast<std::size_t>(i0 + l);
      const double a1 = st.pa1[j], a2 = st.pa2[j];
      if (std::hypot(a1, a2) <= u) {
        s11 += a1 * a1;
        s12 += a1 * a2;
        s22 += a2 * a2;
      }
      const IidBias bias = iid_bias(st, w2, i0 + l);
      s11 -= bias.b11;
      s12 -= bias.b12;
      s22 -= bias.b22;
    }
    ChenBlock cb;
    cb.sigma11 = s11 / denom;
    cb.sigma12 = s12 / denom;
    cb.sigma22 = s22 / denom;
    double t11 = 0.0, t12 = 0.0;
    for (int r = 1; r <= k; ++r) {
      const auto i = static_cast<std::size_t>(i0 + r);
      const double d1 = st.y1[i] - st.y1[i - 1], d2 = st.y2[i] - st.y2[i - 1];
      t11 += d1 * d1;
      t12 += d1 * d2;
    }
    cb.theta11 = t11 / (2.0 * k);
    cb.theta12 = t12 / (2.0 * k);
    const double floored = std::max(cb.sigma11, cfg.delta_m);
    cb.beta = cb.sigma12 / floored;
    cb.debias = debias_formula(cb.sigma12, floored, cb.theta11, cb.theta12, kernel,
                               cfg, m);
    sum += cb.beta - cb.debias;
    out.blocks.push_back(cb);
  }
  out.value = coverage_factor(m, cfg) * static_cast<double>(b) * dt * sum;
  return out;
}

double chen_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel) {
  return chen_day_detail(preavg::day_statistics(day, cfg, kernel), kernel).value;
}

double prvb_day(const DayStatistics& st, const WeightKernel& kernel) {
  const int m = st.m, k = st.cfg.k_m;
  const std::vector<double> w2 = half_sq_increments(kernel, k);
  const double u = norm_level(st.thresholds);
  double s11 = 0.0, s12 = 0.0;
  for (int l = 0; l <= m - k + 1; ++l) {
    const auto j = static_cast<std::size_t>(l);
    const double a1 = st.pa1[j], a2 = st.pa2[j];
    if (!(std::hypot(a1, a2) <= u)) continue;
    const IidBias bias = iid_bias(st, w2, l);
    s11 += a1 * a1 - bias.b11;
    s12 += a1 * a2 - bias.b12;
  }
  if (!(s11 > 0.0)) {
    throw ComputationError("prvb_day: market pre-averaged variance is not positive");
  }
  return s12 / s11;
}

double prvb_day(const DayView& day, const TuningConfig& cfg, const WeightKernel& kernel) {
  return prvb_day(preavg::day_statistics(day, cfg, kernel), kernel);
}

TuningProvider default_tuning() {
  return [](int m) { return tuning_from_m(m); };
}

std::vector<RIBSeries> estimate_series(const PricePanel& panel, const TuningProvider& tuning,
                                       const WeightKernel& kernel,
                                       const std::vector<Estimator>& estimators, int threads) {
  const int n = panel.n_days();
  if (n < 1) throw InvalidArgument("estimate_series: panel has no days");
  if (estimators.empty()) throw InvalidArgument("estimate_series: no estimator requested");
  std::vector<RIBSeries> out(estimators.size());
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    out[e].estimator_tag = estimators[e];
    out[e].rib.assign(static_cast<std::size_t>(n), kNaN);
    out[e].avar.assign(static_cast<std::size_t>(n), kNaN);
    out[e].m_per_day.resize(static_cast<std::size_t>(n));
    out[e].labels.resize(static_cast<std::size_t>(n));
  }
  std::vector<std::vector<std::string>> errors(estimators.size(),
                                               std::vector<std::string>(static_cast<std::size_t>(n)));

  auto run_day = [&](int d) {
    const auto ud = static_cast<std::size_t>(d);
    const DayView day = panel.day(d);
    for (auto& s : out) {
      s.m_per_day[ud] = day.m();
      s.labels[ud] = panel.label(d);
    }
    DayStatistics st;
    try {
      st = preavg::day_statistics(day, tuning(day.m()), kernel);
    } catch (const std::exception& ex) {
      for (auto& e : errors) e[ud] = ex.what();
      return;
    }
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      try {
        switch (estimators[e]) {
          case Estimator::rib: {
            const DayResult r = rib_day(st, kernel);
            out[e].rib[ud] = r.rib;
            out[e].avar[ud] = r.avar;
            break;
          }
          case Estimator::chen:
            out[e].rib[ud] = chen_day_detail(st, kernel).value;
            break;
          case Estimator::prvb:
            out[e].rib[ud] = prvb_day(st, kernel);
            break;
        }
      } catch (const std::exception& ex) {
        errors[e][ud] = ex.what();
      }
    }
  };

  if (threads <= 1 || n == 1) {
    for (int d = 0; d < n; ++d) run_day(d);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int nt = std::min(threads, n);
    for (int t = 0; t < nt; ++t) {
      pool.emplace_back([&] {
        for (int d = next++; d < n; d = next++) run_day(d);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    for (int d = 0; d < n; ++d) {
      if (!errors[e][static_cast<std::size_t>(d)].empty()) {
        out[e].failures.emplace_back(d, errors[e][static_cast<std::size_t>(d)]);
      }
    }
  }
  return out;
}

RIBSeries rib_series(const PricePanel& panel, const TuningProvider& tuning,
                     const WeightKernel& kernel, int threads) {
  return estimate_series(panel, tuning, kernel, {Estimator::rib}, threads).front();
}

}  // namespace drbeta::rib
