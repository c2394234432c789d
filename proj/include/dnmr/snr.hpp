#ifndef DNMR_SNR_HPP
#define DNMR_SNR_HPP

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/geometry.hpp"
#include "dnmr/params.hpp"
#include "dnmr/sensitivity.hpp"

namespace dnmr {

struct SnrInput {
  SampleSpec sample;
  double depth = 0.0;
  double alpha = 0.0;
  double eta = 0.0;  ///< T Hz^-1/2
  double averaging_time = 1.0;

  void validate() const {
    sample.validate();
    require(depth > 0.0, "depth > 0");
    require(eta > 0.0, "eta > 0");
    require(averaging_time > 0.0, "averaging_time > 0");
  }
};

namespace detail {

/// mu0 hbar gamma_n, the dipolar moment prefactor shared by every SNR form.
inline double moment_prefactor(Species s) {
  return 4.0 * constants::pi * constants::mu0_over_4pi * constants::hbar * gamma_of(s);
}

/// |G| of the statistical-polarisation geometry factor.
inline double statistical_weight(double alpha) { return std::abs(g_statistical(alpha)); }

/// Common factor mu0 hbar gamma / (32 eta) sqrt(G rho / 2 pi) sqrt(T_avg).
inline double snr_scale(const SnrInput& in) {
  return moment_prefactor(in.sample.species) / (32.0 * in.eta) *
         std::sqrt(statistical_weight(in.alpha) * in.sample.density / (2.0 * constants::pi)) *
         std::sqrt(in.averaging_time);
}

}  // namespace detail

/// RMS field from a statistically polarised half-space sample at sensor depth `depth`.
inline double b_rms(const SampleSpec& sample, double depth, double alpha) {
  require(depth > 0.0, "depth > 0");
  const double m = constants::mu0_over_4pi * constants::hbar * gamma_of(sample.species);
  const double g = detail::statistical_weight(alpha);
  return std::sqrt(sample.density * m * m * constants::pi * g / (128.0 * depth * depth * depth));
}

inline double snr_halfspace(const SnrInput& in) {
  in.validate();
  return detail::snr_scale(in) / std::sqrt(in.depth * in.depth * in.depth);
}

/// Sample layer of thickness h on the surface.
inline double snr_flake(const SnrInput& in, double h) {
  in.validate();
  require(h > 0.0, "layer thickness > 0");
  const double d = in.depth;
  const double far = d + h;
  const double shell = 1.0 / (d * d * d) - 1.0 / (far * far * far);
  return detail::snr_scale(in) * std::sqrt(shell);
}

/// Half-space SNR averaged over sensor depths uniform in [d_min, d_max].
inline double snr_bulk(const SnrInput& in, double d_min, double d_max) {
  SnrInput probe = in;
  probe.depth = d_min;
  probe.validate();
  require(d_min > 0.0 && d_min < d_max, "0 < d_min < d_max");
  const double k = detail::moment_prefactor(in.sample.species) *
                   std::sqrt(in.sample.density * detail::statistical_weight(in.alpha)) /
                   (16.0 * std::sqrt(2.0 * constants::pi) * in.eta * (d_max - d_min));
  const double bracket = std::sqrt(1.0 / (d_max * d_max * d_max)) * d_max - std::sqrt(1.0 / (d_min * d_min * d_min)) * d_min;
  return -k * bracket * std::sqrt(in.averaging_time);
}

struct FlakeBulkSnr {
  double snr = 0.0;
  /// h exceeded d_min / 5, outside the validity of the small-thickness expansion.
  bool thickness_warning = false;
};

/// Thin-layer SNR averaged over sensor depth, third order in h / d.
inline FlakeBulkSnr snr_flake_bulk(const SnrInput& in, double d_min, double d_max, double h) {
  SnrInput probe = in;
  probe.depth = d_min;
  probe.validate();
  require(d_min > 0.0 && d_min < d_max, "0 < d_min < d_max");
  require(h > 0.0, "layer thickness > 0");
  const double pre = detail::moment_prefactor(in.sample.species) *
                     std::sqrt(in.sample.density * detail::statistical_weight(in.alpha)) /
                     (192.0 * std::sqrt(6.0 * constants::pi) * in.eta * (d_max - d_min));
  const double hi = std::sqrt(h / std::pow(d_max, 4)) * (9.0 * h * d_max - 18.0 * d_max * d_max - 7.0 * h * h) / d_max;
  const double lo = std::sqrt(h / std::pow(d_min, 4)) * (-9.0 * h * d_min + 18.0 * d_min * d_min + 7.0 * h * h) / d_min;
  return {pre * (hi + lo) * std::sqrt(in.averaging_time), h > d_min / 5.0};
}

struct SnrRow {
  double frequency = 0.0;
  double eta = 0.0;
  double b_rms = 0.0;
  double snr = 0.0;
  std::string geometry;
  double depth = 0.0;
  bool warning = false;
};

/// Per-frequency SNR of `p` against `sample`. Presets with a depth range use the
/// depth-averaged forms; a Slab or BulkAverage-with-slab sample uses the thin-layer forms.
inline std::vector<SnrRow> sweep_snr(const DefectSystemParams& p, const SampleSpec& sample,
                                     const std::vector<double>& grid, double averaging_time = 1.0,
                                     unsigned threads = 1) {
  validate_frequency_grid(grid);
  sample.validate();
  const auto eta = sweep_sensitivity(p, grid, threads);

  double d_min = p.depth_min, d_max = p.depth_max;
  std::optional<double> slab;
  if (auto* s = std::get_if<Slab>(&sample.geometry)) slab = s->thickness;
  if (auto* b = std::get_if<BulkAverage>(&sample.geometry)) {
    d_min = b->d_min;
    d_max = b->d_max;
    slab = b->slab_thickness;
  }
  const bool averaged = d_max > d_min;
  std::string label = slab ? "slab" : "half_space";
  if (averaged) label += "_bulk_average";

  std::vector<SnrRow> rows(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SnrRow& r = rows[i];
    r.frequency = grid[i];
    r.eta = eta[i].eta_vol;
    r.geometry = label;
    r.depth = averaged ? 0.5 * (d_min + d_max) : d_min;
    if (!eta[i].feasible) continue;
    SnrInput in{sample, d_min, p.alpha, eta[i].eta_vol, averaging_time};
    if (averaged && slab) {
      const auto fb = snr_flake_bulk(in, d_min, d_max, *slab);
      r.snr = fb.snr;
      r.warning = fb.thickness_warning;
    } else if (averaged) {
      r.snr = snr_bulk(in, d_min, d_max);
    } else if (slab) {
      r.snr = snr_flake(in, *slab);
    } else {
      r.snr = snr_halfspace(in);
    }
    r.b_rms = r.snr * r.eta / std::sqrt(averaging_time);
  }
  return rows;
}

}  // namespace dnmr

#endif
