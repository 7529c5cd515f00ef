#include "drbeta/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drbeta/core.hpp"

namespace drbeta::optim {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidArgument("nelder_mead: empty starting point");
  using Point = std::vector<double>;
  std::vector<Point> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i + 1][i] += options.initial_step * std::max(std::abs(x0[i]), 0.1);
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  auto combine = [&](const Point& a, const Point& b, double t) {
    Point out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  NelderMeadResult res;
  std::vector<std::size_t> order(n + 1);
  int it = 0;
  for (; it < options.max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double diam = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        diam = std::max(diam, std::abs(pts[i][j] - pts[best][j]));
      }
    }
    const double spread = fv[worst] - fv[best];
    if (std::isfinite(spread) &&
        spread <= options.f_tol * (std::abs(fv[best]) + options.f_tol) &&
        diam <= options.x_tol) {
      res.converged = true;
      break;
    }

    Point centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    }
    const Point xr = combine(centroid, pts[worst], -1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const Point xe = combine(centroid, pts[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Point xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, pts[worst], 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = combine(pts[best], pts[i], 0.5);
      fv[i] = f(pts[i]);
    }
  }
  const auto bi = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = pts[bi];
  res.f = fv[bi];
  res.iterations = it;
  return res;
}

}  // namespace drbeta::optim
