#ifndef DNMR_DIFFUSION_HPP
#define DNMR_DIFFUSION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/parallel.hpp"
#include "dnmr/params.hpp"
#include "dnmr/snr.hpp"
#include "dnmr/spectrum.hpp"

namespace dnmr {

/// Time a diffusing molecule stays within `depth` of the sensor: d^2 / (6 D); infinite when D = 0.
inline double correlation_time(double depth, double diffusion_coeff) {
  require(depth > 0.0, "depth > 0");
  require(diffusion_coeff >= 0.0, "diffusion coefficient >= 0");
  if (diffusion_coeff == 0.0) return std::numeric_limits<double>::infinity();
  return depth * depth / (6.0 * diffusion_coeff);
}

/// Nuclear dephasing time limited by both the intrinsic value and the correlation time.
inline double effective_t2n(double t2n_intrinsic, double t_d) {
  require(t2n_intrinsic > 0.0 && t_d > 0.0, "dephasing and correlation times > 0");
  return 1.0 / (1.0 / t2n_intrinsic + 1.0 / t_d);
}

/// Larmor frequency (Hz) of the sample species in its bias field.
inline double larmor_frequency(const SampleSpec& s) { return gamma_over_2pi(s.species) * s.bias_field; }

/// Number of pi pulses in an XY8-n sequence (n repetitions of the 8-pulse block).
constexpr int xy8_pulses(int repetitions) { return 8 * repetitions; }

/// |F_k(nu, tau)|^2 (s^2) of k equally spaced pi pulses with spacing tau, k even. The
/// accumulated phase of a field B cos(2 pi nu t + theta) has amplitude gamma B |F|.
inline double filter_function_sq(double nu, double tau, int k) {
  require(k > 0 && k % 2 == 0, "pulse count even and positive");
  const double w = constants::two_pi * std::abs(nu);
  if (w == 0.0) return 0.0;
  const double x = 0.5 * w * tau;
  // sin(k x) / cos(x), rewritten around the nearest zero of cos(x) so resonances stay exact.
  const double m = std::round((x - 0.5 * constants::pi) / constants::pi);
  const double y = x - 0.5 * constants::pi - m * constants::pi;
  const double ratio = std::abs(y) < 1e-9 ? static_cast<double>(k) : std::sin(k * y) / std::sin(y);
  const double q = std::sin(0.25 * w * tau);
  return 16.0 / (w * w) * q * q * q * q * ratio * ratio;
}

/// Lorentzian of unit area centred at `center` with half width `hwhm` (Hz).
inline double lorentzian(double nu, double center, double hwhm) {
  const double x = nu - center;
  return hwhm / constants::pi / (x * x + hwhm * hwhm);
}

namespace detail {

/// c(m) = sum_n s_n s_{n+m} for the +-1 modulation of k pi pulses sampled on 2k half
/// intervals of length tau / 2 (sign flips after half-intervals 0, 2, 4, ...).
inline std::vector<double> modulation_autocorrelation(int k) {
  const int n = 2 * k;
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = ((i + 1) / 2) % 2 == 0 ? 1 : -1;
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m < n; ++m) {
    long acc = 0;
    for (int i = 0; i + m < n; ++i) acc += s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i + m)];
    c[static_cast<std::size_t>(m)] = static_cast<double>(acc);
  }
  return c;
}

}  // namespace detail

/// Mean-square sensor phase (rad^2) from a statistically polarised signal of rms amplitude
/// b_rms whose spectrum is a unit-area Lorentzian at `larmor` with half width `hwhm` (0: a pure
/// line). Evaluated in the time domain: the Lorentzian is the correlation function
/// exp(i w_L t - 2 pi hwhm |t|), integrated exactly over each pair of constant-sign
/// half-intervals of the pulse sequence.
inline double phase_variance(double gamma_e, double b_rms, double larmor, double hwhm, double tau, int k,
                             const std::vector<double>* autocorrelation = nullptr) {
  require(tau > 0.0, "tau > 0");
  require(hwhm >= 0.0, "linewidth >= 0");
  require(k > 0 && k % 2 == 0, "pulse count even and positive");
  require(larmor > 0.0, "Larmor frequency > 0");
  const double amp2 = gamma_e * gamma_e * b_rms * b_rms;
  if (amp2 == 0.0) return 0.0;
  std::vector<double> local;
  if (!autocorrelation) {
    local = detail::modulation_autocorrelation(k);
    autocorrelation = &local;
  }
  require(autocorrelation->size() == static_cast<std::size_t>(2 * k), "autocorrelation matches pulse count");
  const double h = 0.5 * tau;
  const double w = constants::two_pi * larmor;
  const double gamma = constants::two_pi * hwhm;
  const std::complex<double> a(-gamma, w);
  // Same half-interval: 2 Re int_0^h (h - u) e^{a u} du.
  const std::complex<double> ah = a * h;
  const double self = 2.0 * std::real((std::exp(ah) - 1.0 - ah) / (a * a));
  // Half-intervals m apart (m >= 1): e^{a m h} (e^{a h} - 1)(1 - e^{-a h}) / a^2, using the
  // decaying branch of |t|; the mirrored pairs contribute the complex conjugate.
  const std::complex<double> step = std::exp(ah);
  const std::complex<double> shape = (step - 1.0) * (1.0 - std::exp(-ah)) / (a * a);
  std::complex<double> phase = step;
  double total = self * (*autocorrelation)[0];
  for (std::size_t m = 1; m < autocorrelation->size(); ++m) {
    total += 2.0 * (*autocorrelation)[m] * std::real(phase * shape);
    phase *= step;
  }
  return amp2 * total;
}

struct LineshapeConfig {
  DefectSystemParams defect;
  SampleSpec sample;
  int k = xy8_pulses(100);
  std::vector<double> tau_grid;
  /// Sensor depth; defaults to defect.depth_min.
  std::optional<double> depth;
  /// Multiply C by the sensor's own decay exp(-(k tau / T2(k))^p).
  bool sensor_decay = true;

  double sensor_depth() const { return depth ? *depth : defect.depth_min; }
  double larmor() const { return larmor_frequency(sample); }
  double t2n() const {
    return effective_t2n(sample.t2n_intrinsic, correlation_time(sensor_depth(), sample.diffusion_coeff));
  }
  /// Lorentzian half width 1 / (pi T2*_N); zero for an undamped line.
  double hwhm() const {
    const double t = t2n();
    return std::isinf(t) ? 0.0 : 1.0 / (constants::pi * t);
  }

  void validate() const {
    defect.validate();
    sample.validate();
    require(k > 0 && k % 8 == 0, "k a positive multiple of 8");
    require(!tau_grid.empty(), "tau grid not empty");
    require(tau_grid.front() > 0.0, "tau grid positive");
    for (std::size_t i = 1; i < tau_grid.size(); ++i) require(tau_grid[i] > tau_grid[i - 1], "tau grid increasing");
    require(sensor_depth() > 0.0, "sensor depth > 0");
  }
};

/// Uniform tau grid of n points spanning +-rel around the resonance 1 / (2 f_L).
inline std::vector<double> resonance_tau_grid(double larmor, double rel = 0.3, std::size_t n = 2001) {
  require(larmor > 0.0 && rel > 0.0 && rel < 1.0 && n >= 2, "valid resonance grid");
  const double t0 = 0.5 / larmor;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = t0 * (1.0 - rel + 2.0 * rel * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

struct ContrastPoint {
  double tau = 0.0;
  double contrast = 1.0;
  double equivalent_freq = 0.0;  ///< 1 / (2 tau)
};

inline double sensor_decay_factor(const DefectSystemParams& p, int k, double tau) {
  const double coherence = std::min(std::pow(static_cast<double>(k), p.s_exponent) * p.t2_echo, p.t2_max);
  return std::exp(-std::pow(k * tau / coherence, p.p_stretch));
}

inline std::vector<ContrastPoint> contrast_curve(const LineshapeConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  const double b = b_rms(cfg.sample, cfg.sensor_depth(), cfg.defect.alpha);
  const double ge = cfg.defect.gamma_e();
  const double fl = cfg.larmor();
  const double hw = cfg.hwhm();
  const auto autocorrelation = detail::modulation_autocorrelation(cfg.k);
  std::vector<ContrastPoint> out(cfg.tau_grid.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const double tau = cfg.tau_grid[i];
    double c = std::exp(-0.5 * phase_variance(ge, b, fl, hw, tau, cfg.k, &autocorrelation));
    if (cfg.sensor_decay) c *= sensor_decay_factor(cfg.defect, cfg.k, tau);
    out[i] = {tau, c, 0.5 / tau};
  });
  return out;
}

struct DipMetrics {
  double tau_center = 0.0;
  double depth = 0.0;     ///< max of 1 - C
  double fwhm_hz = 0.0;   ///< width of the 1 - C dip in equivalent-frequency units
};

inline DipMetrics dip_metrics(const std::vector<ContrastPoint>& curve) {
  require(curve.size() >= 3, "curve has at least three points");
  std::size_t first = 0, last = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].contrast < curve[first].contrast) first = last = i;
    else if (curve[i].contrast == curve[first].contrast) last = i;
  }
  // A saturated dip is flat at its bottom; report the middle of the flat run.
  const std::size_t best = first + (last - first) / 2;
  DipMetrics m;
  m.tau_center = curve[best].tau;
  m.depth = 1.0 - curve[best].contrast;
  if (m.depth <= 0.0) return m;
  // Equivalent frequency decreases along the tau grid; flip to an increasing axis. The
  // spacing is not uniform, so interpolate directly rather than via half_max_width.
  const double half = 0.5 * m.depth;
  auto dip = [&](std::size_t i) { return 1.0 - curve[i].contrast; };
  std::size_t lo = best, hi = best;
  while (lo > 0 && dip(lo - 1) >= half) --lo;
  while (hi + 1 < curve.size() && dip(hi + 1) >= half) ++hi;
  auto cross = [&](std::size_t in, std::size_t out) {
    const double a = dip(in), b = dip(out);
    const double t = (a - half) / (a - b);
    return curve[in].equivalent_freq + t * (curve[out].equivalent_freq - curve[in].equivalent_freq);
  };
  const double f_hi = lo > 0 ? cross(lo, lo - 1) : curve.front().equivalent_freq;
  const double f_lo = hi + 1 < curve.size() ? cross(hi, hi + 1) : curve.back().equivalent_freq;
  m.fwhm_hz = f_hi - f_lo;
  return m;
}

struct ContrastRatio {
  double ratio = 0.0;
  double vb_dip = 0.0;
  double nv_dip = 0.0;
  /// One of the dips reached 0.3, outside the small-signal regime.
  bool regime_violation = false;
};

inline constexpr double small_signal_limit = 0.3;

/// Ratio of peak contrast dips of two sensors measuring their own samples.
inline ContrastRatio vb_nv_contrast_ratio(const LineshapeConfig& vb, const LineshapeConfig& nv, unsigned threads = 1) {
  const auto a = dip_metrics(contrast_curve(vb, threads));
  const auto b = dip_metrics(contrast_curve(nv, threads));
  require(b.depth > 0.0, "reference dip non-zero");
  return {a.depth / b.depth, a.depth, b.depth, a.depth >= small_signal_limit || b.depth >= small_signal_limit};
}

/// Contrast-dip lineshape recipe: XY8-100 at 0.0197 T, rho = 1 nm^-3, V_B at 2.5 nm, NV at 6 nm.
namespace lineshape_recipe {

inline constexpr int repetitions = 100;
inline constexpr double density = 1e27;
inline constexpr double vb_depth = 2.5e-9;
inline constexpr double nv_depth = 6e-9;
inline constexpr double bias_field = 0.0197;
/// Density low enough that both dips stay in the small-signal regime.
inline constexpr double small_signal_density = 1e23;

inline LineshapeConfig make(const DefectSystemParams& defect, double depth, const SampleSpec& sample) {
  LineshapeConfig c;
  c.defect = defect;
  c.sample = sample;
  c.sample.density = density;
  c.sample.bias_field = bias_field;
  c.k = xy8_pulses(repetitions);
  c.depth = depth;
  c.sensor_decay = false;
  c.tau_grid = resonance_tau_grid(larmor_frequency(c.sample));
  return c;
}

inline LineshapeConfig vb(const SampleSpec& sample) { return make(preset("vb_aggregated"), vb_depth, sample); }
inline LineshapeConfig nv(const SampleSpec& sample) { return make(preset("single_nv"), nv_depth, sample); }

}  // namespace lineshape_recipe

}  // namespace dnmr

#endif
