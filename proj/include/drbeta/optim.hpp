#pragma once

#include <functional>
#include <vector>

namespace drbeta::optim {

struct NelderMeadOptions {
  int max_iter = 4000;
  /// Stop when the spread of simplex values falls below
  /// f_tol * (|f_best| + f_tol) and the simplex diameter below x_tol.
  double f_tol = 1e-12;
  double x_tol = 1e-9;
  /// Initial simplex edge per coordinate (relative to max(|x0_i|, 0.1)).
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free minimization with the standard reflection/expansion/
/// contraction/shrink coefficients (1, 2, 1/2, 1/2).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace drbeta::optim
