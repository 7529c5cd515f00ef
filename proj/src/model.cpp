#include "drbeta/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "drbeta/optim.hpp"
#include "drbeta/stats.hpp"

namespace drbeta::model {

namespace {

constexpr double kMargin = 1e-6;

void require_finite_series(std::span<const double> x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InvalidArgument(std::string(what) + ": non-finite value at index " +
                            std::to_string(i));
    }
  }
}

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

double init_value(const GarchParams& theta, std::span<const double> x, InitPolicy init) {
  switch (init) {
    case InitPolicy::sample_mean: return stats::mean(x);
    case InitPolicy::zero: return 0.0;
    case InitPolicy::unconditional: return theta.unconditional_mean();
  }
  return 0.0;
}

std::vector<double> recursion_with(const GarchParams& t, std::span<const double> x, double h0) {
  const int n = static_cast<int>(x.size());
  const int r0 = init_length(t);
  std::vector<double> h(static_cast<std::size_t>(n), h0);
  for (int i = r0; i < n; ++i) {
    double v = t.omega_g;
    for (int j = 1; j <= t.p; ++j) v += t.gamma[static_cast<std::size_t>(j - 1)] * h[static_cast<std::size_t>(i - j)];
    for (int j = 1; j <= t.r(); ++j) v += t.alpha_g[static_cast<std::size_t>(j - 1)] * x[static_cast<std::size_t>(i - j)];
    h[static_cast<std::size_t>(i)] = v;
  }
  return h;
}

int resolve_first(const GarchParams& t, int n, int first) {
  const int f = first < 0 ? init_length(t) : first;
  if (f < init_length(t) || f >= n) {
    throw InvalidArgument("quasi_likelihood: first index " + std::to_string(f) +
                          " outside [" + std::to_string(init_length(t)) + ", " +
                          std::to_string(n - 1) + "]");
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// GarchParams
// ---------------------------------------------------------------------------

std::vector<double> GarchParams::to_vector() const {
  std::vector<double> v{omega_g};
  v.insert(v.end(), gamma.begin(), gamma.end());
  v.insert(v.end(), alpha_g.begin(), alpha_g.end());
  return v;
}

GarchParams GarchParams::from_vector(int p, int q, std::span<const double> v) {
  GarchParams g;
  g.p = p;
  g.q = q;
  if (p < 0 || q < 0) throw InvalidArgument("GarchParams: orders must be >= 0");
  if (static_cast<int>(v.size()) != g.n_params()) {
    throw InvalidArgument("GarchParams: expected " + std::to_string(g.n_params()) +
                          " coefficients, got " + std::to_string(v.size()));
  }
  g.omega_g = v[0];
  g.gamma.assign(v.begin() + 1, v.begin() + 1 + p);
  g.alpha_g.assign(v.begin() + 1 + p, v.end());
  return g;
}

double GarchParams::violation() const {
  double sg = 0.0, sp = 0.0;
  for (double v : gamma) sg += std::abs(v);
  for (int i = 0; i < r(); ++i) {
    const double gi = i < p ? gamma[static_cast<std::size_t>(i)] : 0.0;
    sp += std::abs(gi + alpha_g[static_cast<std::size_t>(i)]);
  }
  return std::max(0.0, sg - (1.0 - kMargin)) + std::max(0.0, sp - (1.0 - kMargin));
}

void GarchParams::validate() const {
  if (p < 0 || q < 0) throw InvalidArgument("GarchParams: orders must be >= 0");
  if (static_cast<int>(gamma.size()) != p || static_cast<int>(alpha_g.size()) != r()) {
    throw InvalidArgument("GarchParams: coefficient counts do not match (p, q)");
  }
  for (double v : to_vector()) {
    if (!std::isfinite(v)) throw InvalidArgument("GarchParams: non-finite coefficient");
  }
  if (violation() > 0.0) {
    throw InvalidArgument("GarchParams: theta = " + fmt_vec(to_vector()) +
                          " violates sum|gamma| < 1 or sum|gamma_i + alpha_g_i| < 1");
  }
}

double GarchParams::unconditional_mean() const {
  double d = 1.0;
  for (double v : gamma) d -= v;
  for (double v : alpha_g) d -= v;
  return omega_g / d;
}

GarchParams map_params(const sim::DRBetaParams& dr) {
  dr.validate();
  if (dr.q() < 1 || dr.alpha[0] == 0.0) {
    throw InvalidArgument("map_params: alpha_1 must be present and nonzero");
  }
  const auto rc = sim::rho_coefficients(dr.alpha[0]);
  GarchParams g;
  g.p = dr.p();
  g.q = dr.q();
  g.gamma = dr.gamma;
  double sg = 0.0;
  for (double v : dr.gamma) sg += v;
  const double omega = dr.omega1 - dr.omega2;
  g.omega_g = (rc.r1 - rc.r2 + 2.0 * rc.r3) * omega + (2.0 * rc.r3 - rc.r2) * (1.0 - sg) * dr.omega2;
  g.alpha_g.assign(static_cast<std::size_t>(g.r()), 0.0);
  for (int i = 1; i <= g.r(); ++i) {
    double a = 0.0;
    if (i <= g.p) a += 2.0 * rc.r3 * dr.gamma[static_cast<std::size_t>(i - 1)] * dr.alpha[0];
    if (i <= g.q) a += (rc.r1 - rc.r2) * dr.alpha[static_cast<std::size_t>(i - 1)];
    if (i <= g.q - 1) a += 2.0 * rc.r3 * dr.alpha[static_cast<std::size_t>(i)];
    g.alpha_g[static_cast<std::size_t>(i - 1)] = a;
  }
  g.validate();
  return g;
}

std::string to_string(InitPolicy p) {
  switch (p) {
    case InitPolicy::sample_mean: return "sample_mean";
    case InitPolicy::zero: return "zero";
    case InitPolicy::unconditional: return "unconditional";
  }
  return "?";
}

InitPolicy init_policy_from_string(const std::string& s) {
  if (s == "sample_mean") return InitPolicy::sample_mean;
  if (s == "zero") return InitPolicy::zero;
  if (s == "unconditional") return InitPolicy::unconditional;
  throw InvalidArgument("unknown init policy '" + s + "'");
}

int init_length(const GarchParams& theta) { return std::max(theta.p, theta.r()); }

// ---------------------------------------------------------------------------
// Recursion, likelihood, derivatives
// ---------------------------------------------------------------------------

std::vector<double> h_recursion(const GarchParams& theta, std::span<const double> x,
                                InitPolicy init) {
  if (static_cast<int>(x.size()) < init_length(theta) + 1) {
    throw InvalidArgument("h_recursion: series shorter than init_length + 1");
  }
  require_finite_series(x, "h_recursion");
  return recursion_with(theta, x, init_value(theta, x, init));
}

Eigen::MatrixXd h_derivatives(const GarchParams& t, std::span<const double> x, InitPolicy init) {
  const std::vector<double> h = h_recursion(t, x, init);
  const int n = static_cast<int>(x.size());
  const int k = t.n_params();
  const int r0 = init_length(t);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, k);
  if (init == InitPolicy::unconditional) {
    double den = 1.0;
    for (double v : t.gamma) den -= v;
    for (double v : t.alpha_g) den -= v;
    Eigen::RowVectorXd g0(k);
    g0(0) = 1.0 / den;
    for (int j = 1; j < k; ++j) g0(j) = t.omega_g / (den * den);
    for (int i = 0; i < r0 && i < n; ++i) d.row(i) = g0;
  }
  for (int i = r0; i < n; ++i) {
    d(i, 0) = 1.0;
    for (int j = 1; j <= t.p; ++j) {
      d.row(i) += t.gamma[static_cast<std::size_t>(j - 1)] * d.row(i - j);
      d(i, j) += h[static_cast<std::size_t>(i - j)];
    }
    for (int j = 1; j <= t.r(); ++j) d(i, t.p + j) += x[static_cast<std::size_t>(i - j)];
  }
  return d;
}

double quasi_likelihood(const GarchParams& theta, std::span<const double> x, InitPolicy init,
                        int first) {
  const std::vector<double> h = h_recursion(theta, x, init);
  const int n = static_cast<int>(x.size());
  const int f = resolve_first(theta, n, first);
  double s = 0.0;
  for (int i = f; i < n; ++i) {
    const double e = x[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)];
    s += e * e;
  }
  return -s / static_cast<double>(n - f);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace {

std::vector<double> make_start(int p, int q, double omega, double gamma1, double alpha1) {
  GarchParams g;
  g.p = p;
  g.q = q;
  g.omega_g = omega;
  g.gamma.assign(static_cast<std::size_t>(p), 0.0);
  g.alpha_g.assign(static_cast<std::size_t>(g.r()), 0.0);
  if (p >= 1) g.gamma[0] = gamma1;
  if (g.r() >= 1) g.alpha_g[0] = alpha1;
  return g.to_vector();
}

// AR coefficient from rho2/rho1 and the MA part matched to rho1 for the
// ARMA(1,1) form x_n = w + phi x_{n-1} + D_n - gamma D_{n-1}.
std::vector<double> moment_start(std::span<const double> x, int p, int q) {
  const auto acf = stats::autocorrelation(x, 2);
  const double mu = stats::mean(x);
  const double r1 = acf[0], r2 = acf[1];
  GarchParams probe;
  probe.p = p;
  probe.q = q;
  if (probe.r() == 0) return {mu};
  if (p == 0) {
    const double a = std::clamp(r1, -0.9, 0.9);
    return make_start(p, q, mu * (1.0 - a), 0.0, a);
  }
  double phi = r1 > 0.05 ? r2 / r1 : r1;
  phi = std::clamp(phi, 0.0, 0.95);
  double best_g = 0.0, best_err = kInf;
  for (double g = -0.9; g <= std::min(phi, 0.95) + 1e-12; g += 0.005) {
    const double den = 1.0 - 2.0 * phi * g + g * g;
    const double model = den > 0.0 ? (1.0 - phi * g) * (phi - g) / den : 0.0;
    const double err = std::abs(model - r1);
    if (err < best_err) {
      best_err = err;
      best_g = g;
    }
  }
  return make_start(p, q, mu * (1.0 - phi), best_g, phi - best_g);
}

}  // namespace

FitResult fit(std::span<const double> x, int p, int q, const FitOptions& options) {
  if (p < 0 || q < 0) throw InvalidArgument("fit: orders must be >= 0");
  require_finite_series(x, "fit");
  GarchParams shape;
  shape.p = p;
  shape.q = q;
  const int k = shape.n_params();
  const int n = static_cast<int>(x.size());
  if (n < 10 * k) {
    throw InvalidArgument("fit: need n >= 10*(1+p+max(p,q)) = " + std::to_string(10 * k) +
                          ", got " + std::to_string(n));
  }
  const double var = stats::variance(x);
  const double mu = stats::mean(x);
  if (!(var > 1e-14 * std::max(1.0, mu * mu))) {
    throw ComputationError("fit: series has zero variance; parameters are not identified");
  }
  const int first = options.first_index;
  const double big = 1e4 * (var + mu * mu) + 1.0;
  auto objective = [&](const std::vector<double>& v) {
    const GarchParams g = GarchParams::from_vector(p, q, v);
    const double viol = g.violation();
    if (viol > 0.0) return big * (1.0 + (viol + 1e-3) * (viol + 1e-3));
    const double f = -quasi_likelihood(g, x, options.init, first);
    return std::isfinite(f) ? f : big;
  };

  std::vector<std::vector<double>> starts;
  const double phis[] = {0.2, 0.5, 0.8, 0.95};
  const double shares[] = {0.3, 0.7};
  for (int i = 0; i < options.grid_starts; ++i) {
    const double phi = phis[(i / 2) % 4];
    const double s = shares[i % 2];
    if (shape.r() == 0) {
      starts.push_back({mu * (1.0 + 0.05 * i)});
    } else if (p == 0) {
      starts.push_back(make_start(p, q, mu * (1.0 - phi * (0.6 + 0.4 * s)), 0.0, phi * (0.6 + 0.4 * s)));
    } else {
      starts.push_back(make_start(p, q, mu * (1.0 - phi), s * phi, (1.0 - s) * phi));
    }
  }
  if (options.moment_start) starts.push_back(moment_start(x, p, q));
  if (starts.empty()) throw InvalidArgument("fit: no starting points configured");

  optim::NelderMeadOptions nm;
  nm.max_iter = options.max_iter;
  nm.f_tol = options.tol;
  nm.x_tol = 1e-8;
  FitResult res;
  std::vector<std::pair<double, std::vector<double>>> runs;
  for (const auto& s : starts) {
    if (objective(s) >= big) continue;
    auto r = optim::nelder_mead(objective, s, nm);
    // one restart from the reported optimum guards against simplex collapse
    r = optim::nelder_mead(objective, r.x, nm);
    runs.emplace_back(r.f, r.x);
    res.start_objectives.push_back(r.f);
  }
  if (runs.empty()) throw ComputationError("fit: all starting points are infeasible");
  std::sort(runs.begin(), runs.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (runs.front().first >= big) throw ComputationError("fit: no feasible optimum found");
  res.theta_hat = GarchParams::from_vector(p, q, runs.front().second);
  res.loglik = -runs.front().first;
  res.multistart_spread = runs.size() > 1 ? runs[1].first - runs[0].first : 0.0;
  res.converged = res.multistart_spread <= 1e-6 * std::abs(runs.front().first);
  res.n_used = n - (first < 0 ? init_length(res.theta_hat) : first);

  try {
    const AvarResult av = avar_estimate(res.theta_hat, x, options.init, first);
    res.vhat = av.vhat;
    res.vhat_condition = av.condition;
    const ZResult z = z_statistics(res.theta_hat.to_vector(), av.vhat, res.n_used);
    res.z_stats = z.z;
    res.p_values = z.p_values;
    res.t_marginal = marginal_t(res.theta_hat.to_vector(), av.vhat, res.n_used);
    res.vhat_available = true;
  } catch (const std::exception& e) {
    res.vhat_available = false;
    res.vhat_error = e.what();
  }
  return res;
}

std::vector<std::string> coefficient_names(int p, int q) {
  std::vector<std::string> names{"omega_g"};
  for (int i = 1; i <= p; ++i) names.push_back("gamma_" + std::to_string(i));
  for (int i = 1; i <= std::max(p, q); ++i) names.push_back("alpha_g_" + std::to_string(i));
  return names;
}

AvarResult avar_estimate(const GarchParams& theta, std::span<const double> x, InitPolicy init,
                         int first) {
  const int n = static_cast<int>(x.size());
  const int f = resolve_first(theta, n, first);
  const std::vector<double> h = h_recursion(theta, x, init);
  const Eigen::MatrixXd d = h_derivatives(theta, x, init);
  const int k = theta.n_params();
  const int used = n - f;
  double s2 = 0.0;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  for (int i = f; i < n; ++i) {
    const double e = x[static_cast<std::size_t>(i)] - h[static_cast<std::size_t>(i)];
    s2 += e * e;
    gram.noalias() += d.row(i).transpose() * d.row(i);
  }
  s2 /= used;
  gram /= used;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0) || !(lmin > 1e-12 * lmax)) {
    const auto names = coefficient_names(theta.p, theta.q);
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    std::ostringstream os;
    os << "avar_estimate: derivative Gram matrix is singular; near-collinear coefficients:";
    for (int j = 0; j < k; ++j) {
      if (std::abs(v(j)) > 0.2) os << " " << names[static_cast<std::size_t>(j)];
    }
    throw ComputationError(os.str());
  }
  AvarResult out;
  out.condition = lmax / lmin;
  const Eigen::MatrixXd inv =
      gram.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(k, k));
  out.vhat = s2 * 0.5 * (inv + inv.transpose());
  return out;
}

ZResult z_statistics(const std::vector<double>& theta, const Eigen::MatrixXd& vhat, int n,
                     std::vector<double> null) {
  const int k = static_cast<int>(theta.size());
  if (vhat.rows() != k || vhat.cols() != k) throw InvalidArgument("z_statistics: size mismatch");
  if (null.empty()) null.assign(theta.size(), 0.0);
  if (null.size() != theta.size()) throw InvalidArgument("z_statistics: null size mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (vhat + vhat.transpose()));
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw ComputationError("z_statistics: vhat is not positive definite");
  }
  const Eigen::MatrixXd isqrt = es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                es.eigenvectors().transpose();
  Eigen::VectorXd diff(k);
  for (int j = 0; j < k; ++j) diff(j) = theta[static_cast<std::size_t>(j)] - null[static_cast<std::size_t>(j)];
  const Eigen::VectorXd z = std::sqrt(static_cast<double>(n)) * isqrt * diff;
  ZResult out;
  for (int j = 0; j < k; ++j) {
    out.z.push_back(z(j));
    out.p_values.push_back(stats::two_sided_p(z(j)));
  }
  return out;
}

std::vector<double> marginal_t(const std::vector<double>& theta, const Eigen::MatrixXd& vhat,
                               int n, std::vector<double> null) {
  if (null.empty()) null.assign(theta.size(), 0.0);
  std::vector<double> t;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double v = vhat(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    if (!(v > 0.0)) throw ComputationError("marginal_t: non-positive variance entry");
    t.push_back(std::sqrt(static_cast<double>(n)) * (theta[j] - null[j]) / std::sqrt(v));
  }
  return t;
}

BicResult bic_select(std::span<const double> x, int max_p, int max_q, const FitOptions& options) {
  if (max_p < 0 || max_q < 0) throw InvalidArgument("bic_select: orders must be >= 0");
  FitOptions opt = options;
  opt.first_index = std::max(max_p, max_q);
  BicResult res;
  bool any = false;
  for (int p = 0; p <= max_p; ++p) {
    for (int q = 0; q <= max_q; ++q) {
      BicCell cell;
      cell.p = p;
      cell.q = q;
      cell.k = 1 + p + std::max(p, q);
      if (q < p) {
        // alpha_g has max(p,q) entries, so this is the (p,p) model again
        cell.error = "same parameters as (" + std::to_string(p) + "," + std::to_string(p) + ")";
        res.table.push_back(cell);
        continue;
      }
      try {
        const FitResult f = fit(x, p, q, opt);
        const double used = static_cast<double>(f.n_used);
        cell.rss = -f.loglik * used;
        cell.bic = used * std::log(cell.rss / used) + cell.k * std::log(used);
        cell.ok = std::isfinite(cell.bic);
        if (!cell.ok) cell.error = "non-finite BIC";
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (cell.ok) {
        const BicCell* best = nullptr;
        for (const auto& c : res.table) {
          if (c.ok && c.p == res.p && c.q == res.q) best = &c;
        }
        const bool better =
            !any || cell.bic < best->bic ||
            (cell.bic == best->bic &&
             (cell.p + cell.q < best->p + best->q ||
              (cell.p + cell.q == best->p + best->q && cell.p < best->p)));
        if (better) {
          res.p = p;
          res.q = q;
          any = true;
        }
      }
      res.table.push_back(cell);
    }
  }
  if (!any) throw ComputationError("bic_select: every grid cell failed to fit");
  return res;
}

double forecast_h(const GarchParams& theta, std::span<const double> x, InitPolicy init,
                  int horizon) {
  if (horizon < 1) throw InvalidArgument("forecast_h: horizon must be >= 1");
  const int r0 = init_length(theta);
  if (static_cast<int>(x.size()) < std::max(r0, 1)) {
    throw InvalidArgument("forecast_h: history shorter than the model order");
  }
  require_finite_series(x, "forecast_h");
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> hs = recursion_with(theta, x, init_value(theta, x, init));
  double last = 0.0;
  for (int s = 0; s < horizon; ++s) {
    const int t = static_cast<int>(xs.size());
    double v = theta.omega_g;
    for (int j = 1; j <= theta.p; ++j) v += theta.gamma[static_cast<std::size_t>(j - 1)] * hs[static_cast<std::size_t>(t - j)];
    for (int j = 1; j <= theta.r(); ++j) v += theta.alpha_g[static_cast<std::size_t>(j - 1)] * xs[static_cast<std::size_t>(t - j)];
    hs.push_back(v);
    xs.push_back(v);
    last = v;
  }
  return last;
}

// ---------------------------------------------------------------------------
// ARMA baseline
// ---------------------------------------------------------------------------

namespace {

struct ArmaCoef {
  double c = 0.0;
  std::vector<double> ar, ma;
};

ArmaCoef arma_unpack(int p, const std::vector<double>& v) {
  ArmaCoef a;
  a.c = v[0];
  a.ar.assign(v.begin() + 1, v.begin() + 1 + p);
  a.ma.assign(v.begin() + 1 + p, v.end());
  return a;
}

// Innovations with zero pre-sample errors; returns the sum of squares over
// t >= p and fills `e`.
double arma_residuals(const ArmaCoef& a, std::span<const double> x, std::vector<double>& e) {
  const int n = static_cast<int>(x.size());
  const int p = static_cast<int>(a.ar.size()), q = static_cast<int>(a.ma.size());
  e.assign(static_cast<std::size_t>(n), 0.0);
  double ss = 0.0;
  for (int t = p; t < n; ++t) {
    double v = x[static_cast<std::size_t>(t)] - a.c;
    for (int i = 1; i <= p; ++i) v -= a.ar[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(t - i)];
    for (int j = 1; j <= q && t - j >= 0; ++j) v -= a.ma[static_cast<std::size_t>(j - 1)] * e[static_cast<std::size_t>(t - j)];
    e[static_cast<std::size_t>(t)] = v;
    ss += v * v;
  }
  return ss;
}

double abs_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

ArmaFit arma_forecaster(std::span<const double> x, int p, int q, const std::string& tag) {
  if (p < 0 || q < 0) throw InvalidArgument("arma_forecaster: orders must be >= 0");
  if (x.size() < 20) throw InvalidArgument("arma_forecaster: need at least 20 observations");
  require_finite_series(x, "arma_forecaster");
  ArmaFit out;
  out.p = p;
  out.q = q;
  out.tag = tag;
  const double mu = stats::mean(x);
  const double var = stats::variance(x);
  if (!(var > 1e-14 * std::max(1.0, mu * mu))) {
    out.intercept = mu;
    out.ar.assign(static_cast<std::size_t>(p), 0.0);
    out.ma.assign(static_cast<std::size_t>(q), 0.0);
    out.forecast = x.back();
    return out;
  }
  const auto acf = stats::autocorrelation(x, 1);
  std::vector<double> start{0.0};
  for (int i = 0; i < p; ++i) start.push_back(i == 0 ? std::clamp(acf[0], -0.9, 0.9) : 0.0);
  for (int j = 0; j < q; ++j) start.push_back(0.0);
  double ar_sum = 0.0;
  for (int i = 0; i < p; ++i) ar_sum += start[static_cast<std::size_t>(1 + i)];
  start[0] = mu * (1.0 - ar_sum);

  const double big = 1e6 * (var + mu * mu) * static_cast<double>(x.size()) + 1.0;
  std::vector<double> e;
  auto objective = [&](const std::vector<double>& v) {
    const ArmaCoef a = arma_unpack(p, v);
    const double viol = std::max(0.0, abs_sum(a.ar) - 0.999) + std::max(0.0, abs_sum(a.ma) - 0.999);
    if (viol > 0.0) return big * (1.0 + viol * viol);
    const double ss = arma_residuals(a, x, e);
    return std::isfinite(ss) ? ss : big;
  };
  optim::NelderMeadOptions nm;
  nm.f_tol = 1e-12;
  nm.x_tol = 1e-9;
  auto r = optim::nelder_mead(objective, start, nm);
  r = optim::nelder_mead(objective, r.x, nm);
  const ArmaCoef a = arma_unpack(p, r.x);
  const double ss = arma_residuals(a, x, e);
  const int n = static_cast<int>(x.size());
  out.intercept = a.c;
  out.ar = a.ar;
  out.ma = a.ma;
  out.sigma2 = ss / static_cast<double>(n - p);
  out.invertible = abs_sum(a.ma) < 0.99;
  double f = a.c;
  for (int i = 1; i <= p; ++i) f += a.ar[static_cast<std::size_t>(i - 1)] * x[static_cast<std::size_t>(n - i)];
  for (int j = 1; j <= q; ++j) f += a.ma[static_cast<std::size_t>(j - 1)] * e[static_cast<std::size_t>(n - j)];
  out.forecast = f;
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Metric metric_from_string(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (u == "msfe") return Metric::msfe;
  if (u == "mape") return Metric::mape;
  throw InvalidArgument("unknown metric '" + s + "' (expected msfe or mape)");
}

double evaluate(std::span<const double> pred, std::span<const double> target, Metric metric) {
  if (pred.size() != target.size()) {
    throw InvalidArgument("evaluate: length mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(target.size()) + ")");
  }
  if (pred.empty()) throw InvalidArgument("evaluate: empty series");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += metric == Metric::msfe ? d * d : std::abs(d);
  }
  return s / static_cast<double>(pred.size());
}

AcfDiagnostic residual_acf_diagnostic(std::span<const double> rib, std::span<const double> pred,
                                      int max_lag) {
  if (max_lag < 1) throw InvalidArgument("residual_acf_diagnostic: max_lag must be >= 1");
  if (rib.size() != pred.size()) throw InvalidArgument("residual_acf_diagnostic: length mismatch");
  if (static_cast<int>(rib.size()) < max_lag + 10) {
    throw InvalidArgument("residual_acf_diagnostic: need at least max_lag + 10 points");
  }
  const stats::LinearFit f = stats::ols(pred, rib);
  AcfDiagnostic d;
  d.a = f.intercept;
  d.b = f.slope;
  const double scale = std::max(stats::sd(rib), 1e-300);
  if (stats::sd(f.residuals) <= 1e-10 * scale) {
    d.degenerate = true;
    return d;
  }
  d.acf = stats::autocorrelation(f.residuals, max_lag);
  return d;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const GarchParams& g) {
  j = {{"p", g.p}, {"q", g.q}, {"omega_g", g.omega_g}, {"gamma", g.gamma}, {"alpha_g", g.alpha_g}};
}

void from_json(const nlohmann::json& j, GarchParams& g) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "p" && k != "q" && k != "omega_g" && k != "gamma" && k != "alpha_g") {
      throw InvalidArgument("GarchParams: unknown key '" + k + "'");
    }
  }
  g.p = j.at("p").get<int>();
  g.q = j.at("q").get<int>();
  g.omega_g = j.at("omega_g").get<double>();
  g.gamma = j.at("gamma").get<std::vector<double>>();
  g.alpha_g = j.at("alpha_g").get<std::vector<double>>();
  g.validate();
}

nlohmann::json fit_to_json(const FitResult& f) {
  nlohmann::json j;
  j["theta_hat"] = f.theta_hat;
  j["coefficients"] = coefficient_names(f.theta_hat.p, f.theta_hat.q);
  j["loglik"] = f.loglik;
  j["n_used"] = f.n_used;
  j["converged"] = f.converged;
  j["multistart_spread"] = f.multistart_spread;
  j["start_objectives"] = f.start_objectives;
  j["vhat_available"] = f.vhat_available;
  if (f.vhat_available) {
    nlohmann::json v = nlohmann::json::array();
    for (Eigen::Index r = 0; r < f.vhat.rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < f.vhat.cols(); ++c) row.push_back(f.vhat(r, c));
      v.push_back(row);
    }
    j["vhat"] = v;
    j["vhat_condition"] = f.vhat_condition;
    j["z_stats"] = f.z_stats;
    j["p_values"] = f.p_values;
    j["t_marginal"] = f.t_marginal;
  } else {
    j["vhat_error"] = f.vhat_error;
  }
  return j;
}

}  // namespace drbeta::model
