#ifndef DNMR_SENSITIVITY_HPP
#define DNMR_SENSITIVITY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/golden.hpp"
#include "dnmr/parallel.hpp"
#include "dnmr/params.hpp"

namespace dnmr {

/// Optimised AC sensitivity at one signal frequency.
struct SensitivityPoint {
  double frequency = 0.0;
  /// T Hz^-1/2 um^3/2. Infinite when the point is infeasible.
  double eta_vol = std::numeric_limits<double>::infinity();
  int k = 0;
  double tau_full = 0.0;
  double tau_effective = 0.0;
  double t_r = 0.0;
  double contrast_avg = 0.0;
  double exp_term = 0.0;
  bool feasible = false;
  /// Readout search ended on an edge of the search interval.
  bool readout_at_boundary = false;

  bool operator==(const SensitivityPoint&) const = default;
};

/// Readout-averaged PL contrast for an exponential contrast decay with time constant t_i.
inline double average_contrast(double contrast0, double t_r, double t_i) {
  require(t_r > 0.0 && t_i > 0.0, "readout and initialisation durations must be positive");
  const double x = t_r / t_i;
  // (1 - e^-x) / x, written with expm1 so the x -> 0 limit is exact.
  return contrast0 * (-std::expm1(-x)) / x;
}

/// Readout-noise factor times duty-cycle factor, the part of the sensitivity that depends
/// on the readout time.
inline double readout_objective(double t_r, double t_i, double tau, double counts_rate, double contrast0,
                                double n_defects) {
  const double c = average_contrast(contrast0, t_r, t_i);
  const double n_avg = counts_rate * t_r * n_defects;
  return std::sqrt(1.0 + 1.0 / (c * c * n_avg)) * std::sqrt((t_i + t_r + tau) / tau);
}

inline constexpr double readout_search_min = 1e-9;
inline constexpr double readout_search_max = 1e-1;

struct ReadoutOptimum {
  double t_r = 0.0;
  double objective = 0.0;
  bool at_boundary = false;
};

/// Readout time minimising readout_objective over [1 ns, 100 ms]: 64-point scan in log(t_r),
/// then golden section to 1e-4 relative.
inline ReadoutOptimum optimize_readout(double t_i, double tau_full, double counts_rate, double contrast0,
                                       double n_defects = 1.0) {
  require(t_i > 0.0 && tau_full > 0.0 && counts_rate > 0.0 && contrast0 > 0.0 && n_defects > 0.0,
          "optimize_readout inputs must be positive");
  auto f = [&](double log_t) {
    return readout_objective(std::exp(log_t), t_i, tau_full, counts_rate, contrast0, n_defects);
  };
  const auto m = bracketed_minimum(f, std::log(readout_search_min), std::log(readout_search_max), 64,
                                   std::log1p(1e-4));
  return {std::exp(m.x), m.value, m.at_boundary};
}

/// Unrounded optimal pi-pulse count for signal frequency f.
inline double k_optimal_raw(double f, const DefectSystemParams& p) {
  const double t_b = 1.0 / f;
  const double q = p.p_stretch * (1.0 - p.s_exponent);
  return std::pow(std::pow(2.0 * p.t2_echo / t_b, p.p_stretch) / (2.0 * q), 1.0 / q);
}

/// Largest pulse count before k^s T2 exceeds the saturated coherence time.
inline double k_cap(const DefectSystemParams& p) {
  return std::pow(p.t2_max / p.t2_echo, 1.0 / p.s_exponent);
}

/// Pulse count: raw optimum, capped at saturation, rounded down to whole XY8 blocks, at least 8.
inline int k_optimal(double f, const DefectSystemParams& p) {
  require(f > 0.0, "frequency > 0");
  const double k = std::min(k_optimal_raw(f, p), k_cap(p));
  const double blocks = std::floor(k / 8.0);
  return 8 * static_cast<int>(std::max(1.0, std::min(blocks, 1e8)));
}

/// Sensitivity for a fixed pulse count and readout time; the shared tail of sensitivity_at.
inline SensitivityPoint sensitivity_with(double f, int k, double t_r, const DefectSystemParams& p) {
  SensitivityPoint pt;
  pt.frequency = f;
  pt.k = k;
  pt.tau_full = k * (1.0 / f) / 2.0;
  pt.tau_effective = pt.tau_full - k * p.t_pi();
  pt.t_r = t_r;
  if (pt.tau_effective <= 0.0) return pt;
  const double tau = pt.tau_effective;
  // Coherence grows as k^s but saturates at t2_max; this matters when one XY8 block already
  // exceeds the saturation count.
  const double coherence = std::min(std::pow(static_cast<double>(k), p.s_exponent) * p.t2_echo, p.t2_max);
  pt.exp_term = std::exp(-std::pow(tau / coherence, p.p_stretch));
  pt.contrast_avg = average_contrast(p.contrast0, t_r, p.t_init);
  if (pt.exp_term <= 0.0) return pt;
  const double n_avg = p.counts_per_defect * t_r;
  const double n = p.defects_per_um3();
  pt.eta_vol = (constants::pi / 2.0) / p.gamma_e() / std::sqrt(n * tau) / pt.exp_term *
               std::sqrt(1.0 + 1.0 / (pt.contrast_avg * pt.contrast_avg * n_avg)) *
               std::sqrt((p.t_init + tau + t_r) / tau);
  pt.feasible = true;
  return pt;
}

/// Volume-normalised AC sensitivity with optimised pulse count and readout time.
inline SensitivityPoint sensitivity_at(double f, const DefectSystemParams& p) {
  require(f > 0.0, "frequency > 0");
  const int k = k_optimal(f, p);
  const double tau_eff = k * (1.0 / f) / 2.0 - k * p.t_pi();
  if (tau_eff <= 0.0) return sensitivity_with(f, k, 0.0, p);
  const auto readout = optimize_readout(p.t_init, tau_eff, p.counts_per_defect, p.contrast0, 1.0);
  auto pt = sensitivity_with(f, k, readout.t_r, p);
  pt.readout_at_boundary = readout.at_boundary;
  return pt;
}

/// n log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi > lo && n >= 2, "log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// Default frequency grid: 200 points, 10 kHz to 100 MHz.
inline std::vector<double> default_frequency_grid() { return log_grid(10e3, 100e6, 200); }

inline void validate_frequency_grid(const std::vector<double>& grid) {
  require(!grid.empty(), "frequency grid must not be empty");
  require(grid.front() > 0.0, "frequency grid must be positive");
  for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "frequency grid must be strictly increasing");
}

inline std::vector<SensitivityPoint> sweep_sensitivity(const DefectSystemParams& p, const std::vector<double>& grid,
                                                       unsigned threads = 1) {
  validate_frequency_grid(grid);
  std::vector<SensitivityPoint> out(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) { out[i] = sensitivity_at(grid[i], p); });
  return out;
}

}  // namespace dnmr

#endif
