#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace drbeta {

/// Thrown when an input violates a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation cannot produce a meaningful result
/// (degenerate data, non-identified model, divergence).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Time grid and price panels
// ---------------------------------------------------------------------------

/// Regular intraday grid: m observations per day, step dt = 1/m.
struct TimeGrid {
  int m = 0;
  int n_days = 0;

  double dt() const { return 1.0 / static_cast<double>(m); }
};

enum class PanelKind { latent, observed };

/// One trading day of a bivariate log-price panel: m_i + 1 points
/// (index 0 is the open, index m_i the close).
struct DayView {
  std::span<const double> y1;  // market
  std::span<const double> y2;  // asset

  int m() const { return static_cast<int>(y1.size()) - 1; }
  double dt() const { return 1.0 / static_cast<double>(m()); }
};

/// Day-indexed bivariate log-price series.
///
/// Simulated panels are contiguous: one series of length n_days*m+1 where
/// consecutive days share their boundary point. Ingested panels keep every
/// day separate (m_i+1 points each) so overnight moves never enter an
/// estimator.
class PricePanel {
 public:
  PricePanel() = default;

  static PricePanel contiguous(TimeGrid grid, std::vector<double> x1,
                               std::vector<double> x2, PanelKind kind);

  /// Builds a panel from per-day series; every day needs m_i+1 points.
  static PricePanel from_days(const std::vector<std::vector<double>>& days1,
                              const std::vector<std::vector<double>>& days2,
                              PanelKind kind,
                              std::vector<std::string> labels = {});

  int n_days() const { return static_cast<int>(day_m_.size()); }
  int day_m(int day) const { return day_m_.at(static_cast<std::size_t>(day)); }
  DayView day(int day) const;
  PanelKind kind() const { return kind_; }
  bool is_contiguous() const { return contiguous_; }

  /// Common m if every day has the same number of steps, otherwise 0.
  int uniform_m() const;
  TimeGrid grid() const { return {uniform_m(), n_days()}; }

  const std::vector<double>& x1() const { return x1_; }
  const std::vector<double>& x2() const { return x2_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(int day) const;

  /// Panel restricted to a subset of days (always non-contiguous storage).
  PricePanel select_days(const std::vector<int>& days) const;

 private:
  std::vector<double> x1_, x2_;
  std::vector<std::size_t> day_begin_;
  std::vector<int> day_m_;
  std::vector<std::string> labels_;
  PanelKind kind_ = PanelKind::observed;
  bool contiguous_ = false;
};

// ---------------------------------------------------------------------------
// Weight kernel
// ---------------------------------------------------------------------------

/// Weight function g on [0,1] with g(0)=g(1)=0. `derivative` may be left
/// empty, in which case g' is taken numerically. `breakpoints` lists the
/// interior points where g' is discontinuous; quadrature splits there.
struct WeightFunction {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> derivative;
  std::vector<double> breakpoints;

  double operator()(double x) const {
    return (x <= 0.0 || x >= 1.0) ? 0.0 : g(x);
  }
};

/// g(x) = min(x, 1-x).
WeightFunction triangular_kernel();

struct WeightKernel {
  WeightFunction g;
  double psi0 = 0.0;
  double psi1 = 0.0;
  double phi00 = 0.0;
  double phi01 = 0.0;
  double phi11 = 0.0;
  int quadrature_points = 0;
};

/// Closed-form constants of the triangular kernel.
struct TriangularConstants {
  static constexpr double psi0 = 1.0 / 12.0;
  static constexpr double psi1 = 1.0;
  static constexpr double phi00 = 151.0 / 80640.0;
  static constexpr double phi01 = 1.0 / 96.0;
  static constexpr double phi11 = 1.0 / 6.0;
};

inline constexpr int kDefaultQuadraturePoints = 4097;

/// Computes psi0 = phi0(0), psi1 = phi1(0) and the squared-overlap integrals
/// Phi00, Phi01, Phi11 by composite Simpson quadrature, splitting at the
/// kernel's breakpoints.
WeightKernel kernel_constants(const WeightFunction& g,
                              int quadrature_points = kDefaultQuadraturePoints);

/// Convenience: triangular kernel with its constants.
const WeightKernel& default_kernel();

/// phi_d^m = k * sum_i (g_{i+1}-g_i)(g_{i-d+1}-g_{i-d}), g_i = g(i/k), for
/// d = -k'..k'. Element j of the result holds lag d = j - k'.
std::vector<double> discrete_phi_weights(int k_m, int k_prime_m,
                                         const WeightFunction& g);

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

/// How truncation levels are obtained for each day.
enum class ThresholdMode {
  /// Per-day multiples of the sample sd of the statistic being truncated.
  data_driven,
  /// The u*/a_dot* fields are used as given (may be +inf).
  absolute,
  /// u1,u2 = c*(k dt)^varpi1 and noise levels = c*dt^varpi2 with the
  /// constants taken from the u*/a_dot* fields.
  power_law,
};

struct TuningConfig {
  int k_m = 0;
  int b_m = 0;
  int l_m = 0;
  int k_prime_m = 0;
  double delta_m = 1e-5;

  ThresholdMode threshold_mode = ThresholdMode::data_driven;
  double u1 = kInf, u2 = kInf;
  double u11 = kInf, u12 = kInf, u22 = kInf;
  double a_dot11 = kInf, a_dot12 = kInf, a_dot22 = kInf;

  double varpi1 = 0.47;
  double varpi2 = 0.15;
  double price_sd_multiplier = 4.0;
  double noise_sd_multiplier = 0.2;

  /// Rescale the block sum by m / (floor(m/b)*b) so the dropped tail does
  /// not bias a constant beta.
  bool coverage_renormalization = true;

  /// Throws InvalidArgument naming the violated invariant.
  void validate() const;
  /// Additionally checks the grid size (m >= 2k+2 and m >= b).
  void validate_for(int m) const;

  /// Everything finite thresholds off: absolute mode with +inf levels.
  TuningConfig with_infinite_thresholds() const;

  double c_k(int m) const;
};

struct TuningExponents {
  double c_k = 0.8;
  double c_b = 1.0;
  double kappa = 0.7;
  double c_l = 1.0;
  double varsigma = 0.15;
  double c_kprime = 1.0;
  double tau = 0.124;
  double varpi1 = 0.47;
  double varpi2 = 0.15;
  double delta_m = 1e-5;
};

/// Default window sizes from the power rules (floors of the real values),
/// then the override object is merged on top and the result re-validated.
TuningConfig tuning_from_m(int m, const nlohmann::json& overrides = {},
                           const TuningExponents& exponents = {});

void to_json(nlohmann::json& j, const TuningConfig& cfg);
/// Rejects unknown keys.
void from_json(const nlohmann::json& j, TuningConfig& cfg);

std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(const std::string& s);

}  // namespace drbeta
