#include "drbeta/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drbeta {

// ---------------------------------------------------------------------------
// PricePanel
// ---------------------------------------------------------------------------

PricePanel PricePanel::contiguous(TimeGrid grid, std::vector<double> x1,
                                  std::vector<double> x2, PanelKind kind) {
  if (grid.m < 1 || grid.n_days < 1) {
    throw InvalidArgument("PricePanel: grid needs m >= 1 and n_days >= 1");
  }
  const auto expected = static_cast<std::size_t>(grid.n_days) *
                            static_cast<std::size_t>(grid.m) + 1;
  if (x1.size() != expected || x2.size() != expected) {
    std::ostringstream os;
    os << "PricePanel: series length " << x1.size() << "/" << x2.size()
       << " does not match n_days*m+1 = " << expected;
    throw InvalidArgument(os.str());
  }
  for (std::size_t i = 0; i < expected; ++i) {
    if (!std::isfinite(x1[i]) || !std::isfinite(x2[i])) {
      throw InvalidArgument("PricePanel: non-finite value at index " +
                            std::to_string(i));
    }
  }
  PricePanel p;
  p.x1_ = std::move(x1);
  p.x2_ = std::move(x2);
  p.kind_ = kind;
  p.contiguous_ = true;
  p.day_begin_.resize(static_cast<std::size_t>(grid.n_days));
  p.day_m_.assign(static_cast<std::size_t>(grid.n_days), grid.m);
  for (int d = 0; d < grid.n_days; ++d) {
    p.day_begin_[static_cast<std::size_t>(d)] =
        static_cast<std::size_t>(d) * static_cast<std::size_t>(grid.m);
  }
  return p;
}

PricePanel PricePanel::from_days(const std::vector<std::vector<double>>& days1,
                                 const std::vector<std::vector<double>>& days2,
                                 PanelKind kind,
                                 std::vector<std::string> labels) {
  if (days1.size() != days2.size()) {
    throw InvalidArgument("PricePanel: market and asset day counts differ");
  }
  if (!labels.empty() && labels.size() != days1.size()) {
    throw InvalidArgument("PricePanel: label count does not match day count");
  }
  PricePanel p;
  p.kind_ = kind;
  p.labels_ = std::move(labels);
  for (std::size_t d = 0; d < days1.size(); ++d) {
    if (days1[d].size() != days2[d].size()) {
      throw InvalidArgument("PricePanel: day " + std::to_string(d) +
                            " has unequal series lengths");
    }
    if (days1[d].size() < 2) {
      throw InvalidArgument("PricePanel: day " + std::to_string(d) +
                            " needs at least two points");
    }
    p.day_begin_.push_back(p.x1_.size());
    p.day_m_.push_back(static_cast<int>(days1[d].size()) - 1);
    for (std::size_t i = 0; i < days1[d].size(); ++i) {
      if (!std::isfinite(days1[d][i]) || !std::isfinite(days2[d][i])) {
        throw InvalidArgument("PricePanel: non-finite value on day " +
                              std::to_string(d));
      }
    }
    p.x1_.insert(p.x1_.end(), days1[d].begin(), days1[d].end());
    p.x2_.insert(p.x2_.end(), days2[d].begin(), days2[d].end());
  }
  return p;
}

DayView PricePanel::day(int day) const {
  if (day < 0 || day >= n_days()) {
    throw InvalidArgument("PricePanel: day index " + std::to_string(day) +
                          " out of range");
  }
  const auto begin = day_begin_[static_cast<std::size_t>(day)];
  const auto len = static_cast<std::size_t>(day_m_[static_cast<std::size_t>(day)]) + 1;
  return {std::span<const double>(x1_).subspan(begin, len),
          std::span<const double>(x2_).subspan(begin, len)};
}

int PricePanel::uniform_m() const {
  if (day_m_.empty()) return 0;
  const int m = day_m_.front();
  for (int v : day_m_) {
    if (v != m) return 0;
  }
  return m;
}

std::string PricePanel::label(int day) const {
  if (!labels_.empty()) return labels_.at(static_cast<std::size_t>(day));
  return std::to_string(day + 1);
}

PricePanel PricePanel::select_days(const std::vector<int>& days) const {
  std::vector<std::vector<double>> d1, d2;
  std::vector<std::string> labels;
  for (int d : days) {
    const DayView v = day(d);
    d1.emplace_back(v.y1.begin(), v.y1.end());
    d2.emplace_back(v.y2.begin(), v.y2.end());
    labels.push_back(label(d));
  }
  return from_days(d1, d2, kind_, std::move(labels));
}

// ---------------------------------------------------------------------------
// Kernel constants
// ---------------------------------------------------------------------------

WeightFunction triangular_kernel() {
  WeightFunction w;
  w.name = "triangular";
  w.g = [](double x) { return std::min(x, 1.0 - x); };
  w.derivative = [](double x) { return x < 0.5 ? 1.0 : -1.0; };
  w.breakpoints = {0.5};
  return w;
}

namespace {

// Evaluates g' at x using only values of g inside [lo, hi].
double derivative_within(const WeightFunction& w, double x, double lo,
                         double hi) {
  const double eta = 1e-12;
  const double xc = std::clamp(x, lo + eta, hi - eta);
  if (w.derivative) return w.derivative(xc);
  const double h = std::min(1e-5, 0.25 * (hi - lo));
  if (xc - h < lo) {
    return (-3.0 * w(xc) + 4.0 * w(xc + h) - w(xc + 2.0 * h)) / (2.0 * h);
  }
  if (xc + h > hi) {
    return (3.0 * w(xc) - 4.0 * w(xc - h) + w(xc - 2.0 * h)) / (2.0 * h);
  }
  return (w(xc + h) - w(xc - h)) / (2.0 * h);
}

std::vector<double> sorted_unique(std::vector<double> v, double lo,
                                  double hi) {
  std::vector<double> out;
  for (double x : v) {
    if (x >= lo - 1e-15 && x <= hi + 1e-15) out.push_back(std::clamp(x, lo, hi));
  }
  out.push_back(lo);
  out.push_back(hi);
  std::sort(out.begin(), out.end());
  std::vector<double> uniq;
  for (double x : out) {
    if (uniq.empty() || x - uniq.back() > 1e-13) uniq.push_back(x);
  }
  if (uniq.size() == 1) uniq.push_back(hi);
  return uniq;
}

// Composite Simpson over consecutive pieces; `total_intervals` are spread
// over the pieces in proportion to their length (each piece gets an even
// count of at least 2). f(x, lo, hi) receives the enclosing piece.
template <class F>
double piecewise_simpson(const std::vector<double>& knots, int total_intervals,
                         F&& f) {
  const double span = knots.back() - knots.front();
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
    const double a = knots[p];
    const double b = knots[p + 1];
    if (b - a <= 0.0) continue;
    int n = static_cast<int>(std::ceil(total_intervals * (b - a) / span));
    n = std::max(2, n + (n % 2));
    const double h = (b - a) / n;
    double acc = f(a, a, b) + f(b, a, b);
    for (int i = 1; i < n; ++i) {
      acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h, a, b);
    }
    sum += acc * h / 3.0;
  }
  return sum;
}

struct PhiPair {
  double phi0 = 0.0;
  double phi1 = 0.0;
};

PhiPair overlap_integrals(const WeightFunction& w,
                          const std::vector<double>& g_knots, double s,
                          int intervals) {
  std::vector<double> cand = g_knots;
  for (double b : g_knots) cand.push_back(b + s);
  const auto knots = sorted_unique(cand, s, 1.0);
  if (knots.back() - knots.front() <= 0.0) return {};
  PhiPair out;
  out.phi0 = piecewise_simpson(knots, intervals, [&](double u, double, double) {
    return w(u) * w(u - s);
  });
  out.phi1 = piecewise_simpson(knots, intervals, [&](double u, double lo, double hi) {
    return derivative_within(w, u, lo, hi) *
           derivative_within(w, u - s, lo - s, hi - s);
  });
  return out;
}

}  // namespace

WeightKernel kernel_constants(const WeightFunction& g, int quadrature_points) {
  if (!g.g) throw InvalidArgument("kernel_constants: weight function is empty");
  if (quadrature_points < 5) {
    throw InvalidArgument("kernel_constants: need at least 5 quadrature points");
  }
  if (std::abs(g.g(0.0)) > 1e-12 || std::abs(g.g(1.0)) > 1e-12) {
    throw InvalidArgument("kernel_constants: g must vanish at 0 and 1");
  }
  const int intervals = quadrature_points - 1;

  std::vector<double> g_knots = {0.0, 1.0};
  for (double b : g.breakpoints) {
    if (b > 0.0 && b < 1.0) g_knots.push_back(b);
  }
  std::sort(g_knots.begin(), g_knots.end());

  // phi0/phi1 are smooth in s between differences of g's knots.
  std::vector<double> s_cand;
  for (double a : g_knots) {
    for (double b : g_knots) s_cand.push_back(a - b);
  }
  const auto s_knots = sorted_unique(s_cand, 0.0, 1.0);

  // Cache phi values at the outer nodes (the integrand is evaluated at each
  // node at most twice, on shared piece boundaries).
  double i00 = 0.0, i01 = 0.0, i11 = 0.0;
  const double span = 1.0;
  for (std::size_t p = 0; p + 1 < s_knots.size(); ++p) {
    const double a = s_knots[p];
    const double b = s_knots[p + 1];
    int n = static_cast<int>(std::ceil(intervals * (b - a) / span));
    n = std::max(2, n + (n % 2));
    const double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const PhiPair ph = overlap_integrals(g, g_knots, a + i * h, intervals);
      i00 += w * h / 3.0 * ph.phi0 * ph.phi0;
      i01 += w * h / 3.0 * ph.phi0 * ph.phi1;
      i11 += w * h / 3.0 * ph.phi1 * ph.phi1;
    }
  }

  const PhiPair at0 = overlap_integrals(g, g_knots, 0.0, intervals);
  if (at0.phi0 <= 1e-12) {
    throw InvalidArgument("kernel_constants: degenerate kernel (integral of g^2 ~ 0)");
  }
  WeightKernel k;
  k.g = g;
  k.psi0 = at0.phi0;
  k.psi1 = at0.phi1;
  k.phi00 = i00;
  k.phi01 = i01;
  k.phi11 = i11;
  k.quadrature_points = quadrature_points;
  return k;
}

const WeightKernel& default_kernel() {
  static const WeightKernel k = [] {
    WeightKernel out;
    out.g = triangular_kernel();
    out.psi0 = TriangularConstants::psi0;
    out.psi1 = TriangularConstants::psi1;
    out.phi00 = TriangularConstants::phi00;
    out.phi01 = TriangularConstants::phi01;
    out.phi11 = TriangularConstants::phi11;
    out.quadrature_points = 0;
    return out;
  }();
  return k;
}

std::vector<double> discrete_phi_weights(int k_m, int k_prime_m,
                                         const WeightFunction& g) {
  if (k_m < 2) throw InvalidArgument("discrete_phi_weights: k_m must be >= 2");
  if (k_prime_m < 0) throw InvalidArgument("discrete_phi_weights: k'_m must be >= 0");
  const double k = static_cast<double>(k_m);
  auto gi = [&](int i) { return g(static_cast<double>(i) / k); };
  // increments g_{i+1} - g_i are non-zero only for i in [-1, k_m]
  auto dg = [&](int i) { return gi(i + 1) - gi(i); };
  std::vector<double> out(static_cast<std::size_t>(2 * k_prime_m + 1), 0.0);
  for (int d = -k_prime_m; d <= k_prime_m; ++d) {
    double s = 0.0;
    for (int i = -1; i <= k_m; ++i) s += dg(i) * dg(i - d);
    out[static_cast<std::size_t>(d + k_prime_m)] = k * s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// TuningConfig
// ---------------------------------------------------------------------------

void TuningConfig::validate() const {
  std::ostringstream os;
  if (k_m < 2) os << "k_m=" << k_m << " must be >= 2; ";
  if (l_m < 1) os << "l_m=" << l_m << " must be >= 1; ";
  if (!(6 * l_m < b_m)) os << "6*l_m=" << 6 * l_m << " must be < b_m=" << b_m << "; ";
  if (!(2 * k_m < b_m)) os << "2*k_m=" << 2 * k_m << " must be < b_m=" << b_m << "; ";
  if (k_prime_m < 1) os << "k_prime_m=" << k_prime_m << " must be >= 1; ";
  if (!(delta_m > 0.0)) os << "delta_m=" << delta_m << " must be > 0; ";
  const double levels[] = {u1, u2, u11, u12, u22, a_dot11, a_dot12, a_dot22};
  const char* names[] = {"u1", "u2", "u11", "u12", "u22", "a_dot11", "a_dot12", "a_dot22"};
  for (int i = 0; i < 8; ++i) {
    if (!(levels[i] > 0.0)) os << names[i] << "=" << levels[i] << " must be > 0; ";
  }
  if (!(price_sd_multiplier > 0.0)) os << "price_sd_multiplier must be > 0; ";
  if (!(noise_sd_multiplier > 0.0)) os << "noise_sd_multiplier must be > 0; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw InvalidArgument("TuningConfig: " + msg);
}

void TuningConfig::validate_for(int m) const {
  validate();
  if (m < 2 * k_m + 2) {
    throw InvalidArgument("TuningConfig: m=" + std::to_string(m) +
                          " must be >= 2*k_m+2=" + std::to_string(2 * k_m + 2));
  }
  if (m < b_m) {
    throw InvalidArgument("TuningConfig: day length m=" + std::to_string(m) +
                          " shorter than one block b_m=" + std::to_string(b_m));
  }
}

TuningConfig TuningConfig::with_infinite_thresholds() const {
  TuningConfig c = *this;
  c.threshold_mode = ThresholdMode::absolute;
  c.u1 = c.u2 = c.u11 = c.u12 = c.u22 = kInf;
  c.a_dot11 = c.a_dot12 = c.a_dot22 = kInf;
  return c;
}

double TuningConfig::c_k(int m) const {
  return static_cast<double>(k_m) / std::sqrt(static_cast<double>(m));
}

namespace {
int floor_rule(double c, int m, double exponent) {
  return static_cast<int>(std::floor(c * std::pow(static_cast<double>(m), exponent) + 1e-9));
}
}  // namespace

TuningConfig tuning_from_m(int m, const nlohmann::json& overrides,
                           const TuningExponents& e) {
  if (m < 100) throw InvalidArgument("tuning_from_m: m=" + std::to_string(m) + " must be >= 100");
  TuningConfig cfg;
  cfg.k_m = floor_rule(e.c_k, m, 0.5);
  cfg.b_m = floor_rule(e.c_b, m, e.kappa);
  cfg.l_m = floor_rule(e.c_l, m, e.varsigma);
  cfg.k_prime_m = floor_rule(e.c_kprime, m, e.tau);
  cfg.delta_m = e.delta_m;
  cfg.varpi1 = e.varpi1;
  cfg.varpi2 = e.varpi2;
  if (!overrides.is_null() && !overrides.empty()) {
    if (!overrides.is_object()) throw InvalidArgument("tuning overrides must be a JSON object");
    nlohmann::json merged = cfg;
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
      merged[it.key()] = it.value();
    }
    cfg = merged.get<TuningConfig>();
  }
  cfg.validate();
  return cfg;
}

std::string to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::data_driven: return "data_driven";
    case ThresholdMode::absolute: return "absolute";
    case ThresholdMode::power_law: return "power_law";
  }
  return "data_driven";
}

ThresholdMode threshold_mode_from_string(const std::string& s) {
  if (s == "data_driven") return ThresholdMode::data_driven;
  if (s == "absolute") return ThresholdMode::absolute;
  if (s == "power_law") return ThresholdMode::power_law;
  throw InvalidArgument("unknown threshold_mode '" + s + "'");
}

namespace {
nlohmann::json level_to_json(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  return v;
}
double level_from_json(const nlohmann::json& j, const char* key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    throw InvalidArgument(std::string("TuningConfig: bad value for ") + key);
  }
  if (!j.is_number()) throw InvalidArgument(std::string("TuningConfig: ") + key + " must be a number");
  return j.get<double>();
}
}  // namespace

void to_json(nlohmann::json& j, const TuningConfig& c) {
  j = nlohmann::json{
      {"k_m", c.k_m},
      {"b_m", c.b_m},
      {"l_m", c.l_m},
      {"k_prime_m", c.k_prime_m},
      {"delta_m", c.delta_m},
      {"threshold_mode", to_string(c.threshold_mode)},
      {"u1", level_to_json(c.u1)},
      {"u2", level_to_json(c.u2)},
      {"u11", level_to_json(c.u11)},
      {"u12", level_to_json(c.u12)},
      {"u22", level_to_json(c.u22)},
      {"a_dot11", level_to_json(c.a_dot11)},
      {"a_dot12", level_to_json(c.a_dot12)},
      {"a_dot22", level_to_json(c.a_dot22)},
      {"varpi1", c.varpi1},
      {"varpi2", c.varpi2},
      {"price_sd_multiplier", c.price_sd_multiplier},
      {"noise_sd_multiplier", c.noise_sd_multiplier},
      {"coverage_renormalization", c.coverage_renormalization},
  };
}

void from_json(const nlohmann::json& j, TuningConfig& c) {
  if (!j.is_object()) throw InvalidArgument("TuningConfig: expected a JSON object");
  TuningConfig out = c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    auto as_int = [&] {
      if (!v.is_number_integer()) throw InvalidArgument("TuningConfig: " + k + " must be an integer");
      return v.get<int>();
    };
    auto as_num = [&] {
      if (!v.is_number()) throw InvalidArgument("TuningConfig: " + k + " must be a number");
      return v.get<double>();
    };
    if (k == "k_m") out.k_m = as_int();
    else if (k == "b_m") out.b_m = as_int();
    else if (k == "l_m") out.l_m = as_int();
    else if (k == "k_prime_m") out.k_prime_m = as_int();
    else if (k == "delta_m") out.delta_m = as_num();
    else if (k == "threshold_mode") out.threshold_mode = threshold_mode_from_string(v.get<std::string>());
    else if (k == "u1") out.u1 = level_from_json(v, "u1");
    else if (k == "u2") out.u2 = level_from_json(v, "u2");
    else if (k == "u11") out.u11 = level_from_json(v, "u11");
    else if (k == "u12") out.u12 = level_from_json(v, "u12");
    else if (k == "u22") out.u22 = level_from_json(v, "u22");
    else if (k == "a_dot11") out.a_dot11 = level_from_json(v, "a_dot11");
    else if (k == "a_dot12") out.a_dot12 = level_from_json(v, "a_dot12");
    else if (k == "a_dot22") out.a_dot22 = level_from_json(v, "a_dot22");
    else if (k == "varpi1") out.varpi1 = as_num();
    else if (k == "varpi2") out.varpi2 = as_num();
    else if (k == "price_sd_multiplier") out.price_sd_multiplier = as_num();
    else if (k == "noise_sd_multiplier") out.noise_sd_multiplier = as_num();
    else if (k == "coverage_renormalization") {
      if (!v.is_boolean()) throw InvalidArgument("TuningConfig: coverage_renormalization must be boolean");
      out.coverage_renormalization = v.get<bool>();
    } else {
      throw InvalidArgument("TuningConfig: unknown key '" + k + "'");
    }
  }
  c = out;
}

}  // namespace drbeta
