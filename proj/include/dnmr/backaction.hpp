#ifndef DNMR_BACKACTION_HPP
#define DNMR_BACKACTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/parallel.hpp"
#include "dnmr/params.hpp"
#include "dnmr/spectrum.hpp"
#include "dnmr/vec3.hpp"

namespace dnmr {

inline constexpr double default_coupling_cutoff = 10e-9;

/// Electronic defect spins below the surface (z <= 0) that shift the sample nuclei.
struct DefectLayout {
  std::vector<Vec3> positions;
  std::vector<Vec3> axes;
  double gamma_e = constants::gamma_e_from_g(2.0);
  /// Fraction of the full m_s = 1 coupling felt while the sensor sits in its sensing superposition.
  double superposition_factor = 0.5;
  /// Non-reference defects farther than this from a spin do not shift it.
  double coupling_cutoff = default_coupling_cutoff;

  std::size_t size() const { return positions.size(); }

  void validate() const {
    require(!positions.empty(), "layout has at least one defect");
    require(positions.size() == axes.size(), "one axis per defect position");
    for (std::size_t i = 0; i < positions.size(); ++i) {
      require(positions[i].z <= 0.0, "defect positions at or below the surface (z <= 0)");
      require(std::abs(axes[i].norm() - 1.0) <= 1e-12, "defect axes normalised");
    }
    require(superposition_factor >= 0.0 && superposition_factor <= 1.0, "superposition factor in [0, 1]");
    require(coupling_cutoff > 0.0, "coupling cutoff > 0");
    require(gamma_e > 0.0, "gamma_e > 0");
  }
};

/// One defect at depth d with its axis tilted alpha from the surface normal.
inline DefectLayout single_defect(double depth, double alpha, double gamma_e) {
  require(depth > 0.0, "depth > 0");
  DefectLayout l;
  l.positions = {Vec3{0.0, 0.0, -depth}};
  l.axes = {axis_from_alpha(alpha)};
  l.gamma_e = gamma_e;
  return l;
}

inline constexpr std::size_t default_max_sites = 30'000'000;

/// Cubic grid of sample-spin sites filling a box above the surface, laterally centred on
/// (center_x, center_y). Each site stands for site_weight real spins.
struct SampleLattice {
  double side = 0.0;
  double height = 0.0;  ///< box extent in z; equals side unless the sample is a thin layer
  double center_x = 0.0;
  double center_y = 0.0;
  double spacing = 0.0;
  double spin_density = 0.0;  ///< spins / m^3
  std::optional<std::uint64_t> jitter_seed;
  std::size_t max_sites = default_max_sites;

  std::size_t nx() const { return static_cast<std::size_t>(std::max(1.0, std::round(side / spacing))); }
  std::size_t nz() const { return static_cast<std::size_t>(std::max(1.0, std::round(height / spacing))); }
  std::size_t count() const { return nx() * nx() * nz(); }
  double step_xy() const { return side / static_cast<double>(nx()); }
  double step_z() const { return height / static_cast<double>(nz()); }
  /// Real spins represented by one site.
  double site_weight() const { return spin_density * step_xy() * step_xy() * step_z(); }

  void validate() const {
    require(side > 0.0 && height > 0.0, "lattice box dimensions > 0");
    require(spacing > 0.0, "lattice spacing > 0");
    require(spin_density > 0.0, "spin density > 0");
    require(side / spacing < 1e6 && height / spacing < 1e6, "lattice spacing resolves the box");
    require(count() <= max_sites, "lattice site count <= configured maximum");
  }

  /// Site i; x fastest, then y, then z. Jittered sites move by up to half a step per axis.
  Vec3 site(std::size_t i) const {
    const std::size_t n = nx();
    const std::size_t ix = i % n, iy = (i / n) % n, iz = i / (n * n);
    double ux = 0.5, uy = 0.5, uz = 0.5;
    if (jitter_seed) {
      ux = hashed_uniform(*jitter_seed, i, 0);
      uy = hashed_uniform(*jitter_seed, i, 1);
      uz = hashed_uniform(*jitter_seed, i, 2);
    }
    const double a = step_xy(), c = step_z();
    return {center_x - 0.5 * side + (static_cast<double>(ix) + ux) * a,
            center_y - 0.5 * side + (static_cast<double>(iy) + uy) * a, (static_cast<double>(iz) + uz) * c};
  }
};

/// Box side used for a sensor at depth d: 4d, but never below 4 nm.
inline double sampling_box_side(double depth) { return std::max(4.0 * depth, 4e-9); }

/// Lattice above a defect at `depth` with spacing rho^-1/3.
inline SampleLattice natural_lattice(double depth, double spin_density) {
  SampleLattice l;
  l.side = l.height = sampling_box_side(depth);
  l.spin_density = spin_density;
  l.spacing = std::cbrt(1.0 / spin_density);
  return l;
}

/// Lattice above a defect at `depth` with the spacing chosen so the box holds about
/// `target_sites` sites; site weights carry the physical density.
inline SampleLattice resolved_lattice(double depth, double spin_density, std::size_t target_sites,
                                      std::optional<std::uint64_t> jitter_seed = std::nullopt) {
  require(target_sites >= 1, "target site count >= 1");
  SampleLattice l;
  l.side = l.height = sampling_box_side(depth);
  l.spin_density = spin_density;
  l.spacing = l.side / std::cbrt(static_cast<double>(target_sites));
  l.jitter_seed = jitter_seed;
  return l;
}

/// (mu0/4pi) gamma_e gamma_n hbar, the dipolar coupling constant in rad/s m^3.
inline double dipolar_constant(double gamma_e, double gamma_n) {
  return constants::mu0_over_4pi * gamma_e * gamma_n * constants::hbar;
}

/// Secular (Iz Sz) dipolar shift in Hz of a nucleus at spin_pos from a defect at
/// defect_pos with quantization axis `axis`, scaled by `factor`. Zero beyond `cutoff`.
inline double secular_shift(const Vec3& defect_pos, const Vec3& axis, const Vec3& spin_pos, double gamma_e,
                            double gamma_n, double factor,
                            double cutoff = std::numeric_limits<double>::infinity()) {
  const Vec3 r = spin_pos - defect_pos;
  const double r2 = r.dot(r);
  require(r2 > 0.0, "spin position distinct from defect position");
  if (r2 > cutoff * cutoff) return 0.0;
  const double cos2 = r.dot(axis) * r.dot(axis) / r2;
  return factor * dipolar_constant(gamma_e, gamma_n) * (1.0 - 3.0 * cos2) / (r2 * std::sqrt(r2)) /
         constants::two_pi;
}

/// Mean-square field (T^2) along the defect axis from one statistically polarised spin-1/2
/// nucleus precessing about that axis.
inline double detection_weight(const Vec3& defect_pos, const Vec3& axis, const Vec3& spin_pos, double gamma_n) {
  const Vec3 r = spin_pos - defect_pos;
  const double r2 = r.dot(r);
  require(r2 > 0.0, "spin position distinct from defect position");
  const double cos2 = r.dot(axis) * r.dot(axis) / r2;
  const double m = constants::mu0_over_4pi * constants::hbar * gamma_n;
  return m * m * 0.25 * 9.0 * cos2 * (1.0 - cos2) / (r2 * r2 * r2);
}

/// How each sample spin contributes to the measured lineshape.
enum class Weighting {
  /// Every spin in the sampling box counts equally.
  Uniform,
  /// Spins count by their detection_weight with respect to the reference defect.
  Detection,
  /// Spins count by the field amplitude they produce at the reference defect,
  /// sqrt(detection_weight).
  Amplitude,
};

struct LineshapeOptions {
  Species species = Species::H1;
  Weighting weighting = Weighting::Amplitude;
  std::size_t bins = 2001;
  double span_percentiles = 5.0;  ///< half-span in units of the 99th-percentile |shift|
  unsigned threads = 1;
};

namespace detail {

inline constexpr std::size_t lattice_chunk = 1u << 16;

/// Shift of one spin: the reference defect always contributes; others only inside the cutoff.
inline double total_shift(const DefectLayout& layout, std::size_t reference, const Vec3& spin, double gamma_n) {
  double s = 0.0;
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const double cut = j == reference ? std::numeric_limits<double>::infinity() : layout.coupling_cutoff;
    s += secular_shift(layout.positions[j], layout.axes[j], spin, layout.gamma_e, gamma_n,
                       layout.superposition_factor, cut);
  }
  return s;
}

/// Sums the shift on a spin like total_shift, but visits only the non-reference defects in
/// lateral cells (a quarter cutoff wide) that intersect the cutoff disc around the spin.
class ShiftEvaluator {
 public:
  ShiftEvaluator(const DefectLayout& layout, std::size_t reference, double gamma_n)
      : layout_(layout), reference_(reference), gamma_n_(gamma_n), cell_(0.25 * layout.coupling_cutoff) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (std::size_t j = 0; j < layout.size(); ++j) {
      if (j == reference) continue;
      x0 = std::min(x0, layout.positions[j].x);
      x1 = std::max(x1, layout.positions[j].x);
      y0 = std::min(y0, layout.positions[j].y);
      y1 = std::max(y1, layout.positions[j].y);
    }
    if (layout.size() == 1) return;
    x0_ = x0;
    y0_ = y0;
    nx_ = static_cast<long>(std::floor((x1 - x0) / cell_)) + 1;
    ny_ = static_cast<long>(std::floor((y1 - y0) / cell_)) + 1;
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t j = 0; j < layout.size(); ++j) {
      if (j == reference) continue;
      const long cx = static_cast<long>(std::floor((layout.positions[j].x - x0) / cell_));
      const long cy = static_cast<long>(std::floor((layout.positions[j].y - y0) / cell_));
      cells_[static_cast<std::size_t>(cy * nx_ + cx)].push_back(j);
    }
  }

  double operator()(const Vec3& spin) const {
    double s = secular_shift(layout_.positions[reference_], layout_.axes[reference_], spin, layout_.gamma_e, gamma_n_,
                             layout_.superposition_factor);
    if (cells_.empty()) return s;
    const double cut = layout_.coupling_cutoff;
    const long cx0 = std::max(0L, static_cast<long>(std::floor((spin.x - cut - x0_) / cell_)));
    const long cx1 = std::min(nx_ - 1, static_cast<long>(std::floor((spin.x + cut - x0_) / cell_)));
    const long cy0 = std::max(0L, static_cast<long>(std::floor((spin.y - cut - y0_) / cell_)));
    const long cy1 = std::min(ny_ - 1, static_cast<long>(std::floor((spin.y + cut - y0_) / cell_)));
    for (long y = cy0; y <= cy1; ++y) {
      const double ylo = y0_ + static_cast<double>(y) * cell_;
      const double dy = std::max({0.0, ylo - spin.y, spin.y - (ylo + cell_)});
      for (long x = cx0; x <= cx1; ++x) {
        const double xlo = x0_ + static_cast<double>(x) * cell_;
        const double dx = std::max({0.0, xlo - spin.x, spin.x - (xlo + cell_)});
        if (dx * dx + dy * dy > cut * cut) continue;
        for (std::size_t j : cells_[static_cast<std::size_t>(y * nx_ + x)]) {
          s += secular_shift(layout_.positions[j], layout_.axes[j], spin, layout_.gamma_e, gamma_n_,
                             layout_.superposition_factor, cut);
        }
      }
    }
    return s;
  }

 private:
  const DefectLayout& layout_;
  std::size_t reference_;
  double gamma_n_;
  double cell_;
  double x0_ = 0.0, y0_ = 0.0;
  long nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

/// Per-chunk partial results are combined in chunk order, so sums do not depend on the
/// number of workers.
template <typename Partial, typename ChunkFn>
std::vector<Partial> chunked(std::size_t n, unsigned threads, ChunkFn&& fn) {
  const std::size_t chunks = (n + lattice_chunk - 1) / lattice_chunk;
  std::vector<Partial> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = c * lattice_chunk;
    parts[c] = fn(lo, std::min(n, lo + lattice_chunk));
  });
  return parts;
}

// Log-spaced |shift| bins for the percentile pass: 0 Hz plus 20 bins per decade from 1e-6 Hz to 1e10 Hz.
inline constexpr int log_bins_per_decade = 20;
inline constexpr double log_bin_floor = 1e-6;
inline constexpr int log_bin_count = 16 * log_bins_per_decade + 2;

inline int log_bin(double a) {
  if (!(a > log_bin_floor)) return 0;
  const int b = 1 + static_cast<int>(std::floor(std::log10(a / log_bin_floor) * log_bins_per_decade));
  return std::clamp(b, 1, log_bin_count - 1);
}

inline double log_bin_upper(int b) {
  if (b == 0) return 0.0;
  return log_bin_floor * std::pow(10.0, static_cast<double>(b) / log_bins_per_decade);
}

}  // namespace detail

/// Weighted histogram of back-action shifts over the lattice, normalised to unit sum.
/// Bins span +-span_percentiles times the 99th-percentile |shift|.
inline Spectrum lineshape(const DefectLayout& layout, const SampleLattice& lattice, std::size_t reference,
                          const LineshapeOptions& opt = {}) {
  layout.validate();
  lattice.validate();
  require(reference < layout.size(), "reference defect index in range");
  require(opt.bins >= 3 && opt.bins % 2 == 1, "bin count odd and >= 3");
  require(opt.span_percentiles > 0.0, "span > 0");
  const double gamma_n = gamma_of(opt.species);
  const std::size_t n = lattice.count();
  const Vec3& ref_pos = layout.positions[reference];
  const Vec3& ref_axis = layout.axes[reference];
  const detail::ShiftEvaluator shift_of(layout, reference, gamma_n);
  auto weight_of = [&](const Vec3& spin) {
    switch (opt.weighting) {
      case Weighting::Uniform: return 1.0;
      case Weighting::Detection: return detection_weight(ref_pos, ref_axis, spin, gamma_n);
      case Weighting::Amplitude: return std::sqrt(detection_weight(ref_pos, ref_axis, spin, gamma_n));
    }
    return 1.0;
  };

  struct Moments {
    std::vector<double> log_hist;
    double weight = 0.0;
    double weighted_shift = 0.0;
  };
  const auto first = detail::chunked<Moments>(n, opt.threads, [&](std::size_t lo, std::size_t hi) {
    Moments m;
    m.log_hist.assign(detail::log_bin_count, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3 spin = lattice.site(i);
      const double s = shift_of(spin);
      const double w = weight_of(spin);
      m.log_hist[static_cast<std::size_t>(detail::log_bin(std::abs(s)))] += w;
      m.weight += w;
      m.weighted_shift += w * s;
    }
    return m;
  });
  std::vector<double> log_hist(detail::log_bin_count, 0.0);
  double total_weight = 0.0, weighted_shift = 0.0;
  for (const auto& m : first) {
    for (int b = 0; b < detail::log_bin_count; ++b) log_hist[b] += m.log_hist[b];
    total_weight += m.weight;
    weighted_shift += m.weighted_shift;
  }
  require(total_weight > 0.0, "lineshape weights are not all zero");

  double p99 = 0.0, running = 0.0;
  for (int b = 0; b < detail::log_bin_count; ++b) {
    running += log_hist[b];
    if (running >= 0.99 * total_weight) {
      p99 = detail::log_bin_upper(b);
      break;
    }
  }
  // Every shift is (numerically) zero: a single populated centre bin.
  const double half_span = p99 > 0.0 ? opt.span_percentiles * p99 : 1.0;
  const double width = 2.0 * half_span / static_cast<double>(opt.bins);
  const double lo_edge = -half_span;

  const auto second = detail::chunked<std::vector<double>>(n, opt.threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> h(opt.bins, 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec3 spin = lattice.site(i);
      const double s = shift_of(spin);
      const double pos = (s - lo_edge) / width;
      if (pos < 0.0 || pos >= static_cast<double>(opt.bins)) continue;
      h[static_cast<std::size_t>(pos)] += weight_of(spin);
    }
    return h;
  });

  Spectrum out;
  out.freq.resize(opt.bins);
  out.amplitude.assign(opt.bins, 0.0);
  for (std::size_t b = 0; b < opt.bins; ++b) out.freq[b] = lo_edge + (static_cast<double>(b) + 0.5) * width;
  out.freq[opt.bins / 2] = 0.0;
  for (const auto& h : second)
    for (std::size_t b = 0; b < opt.bins; ++b) out.amplitude[b] += h[b];
  finalize_spectrum(out);
  out.mean_shift = weighted_shift / total_weight;
  return out;
}

/// Mean-square field (T^2) at the reference defect summed over lattice sites; its square
/// root is the Monte Carlo counterpart of b_rms.
inline double lattice_b_rms_squared(const DefectLayout& layout, const SampleLattice& lattice, std::size_t reference,
                                    Species species = Species::H1, unsigned threads = 1) {
  layout.validate();
  lattice.validate();
  require(reference < layout.size(), "reference defect index in range");
  const double gamma_n = gamma_of(species);
  const Vec3& pos = layout.positions[reference];
  const Vec3& axis = layout.axes[reference];
  const auto parts = detail::chunked<double>(lattice.count(), threads, [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += detection_weight(pos, axis, lattice.site(i), gamma_n);
    return s;
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total * lattice.site_weight();
}

/// Mean 2D nearest-neighbour scale 1/sqrt(n_A) for an areal defect density n_A (m^-2).
inline double lateral_spacing_from_areal(double areal_density) {
  require(areal_density > 0.0, "areal density > 0");
  return 1.0 / std::sqrt(areal_density);
}

/// Lateral spacing for a defect layer of the given thickness at a ppm concentration.
inline double nv_lateral_spacing(double density_ppm, Host host, double layer_thickness) {
  require(density_ppm > 0.0, "density_ppm > 0");
  require(layer_thickness > 0.0, "layer thickness > 0");
  return lateral_spacing_from_areal(ppm_to_density(density_ppm, host) * layer_thickness);
}

/// Thickness of an n-layer hBN flake.
inline double hbn_stack_thickness(int layers) {
  require(layers >= 1, "layer count >= 1");
  return layers * constants::hbn_interlayer_spacing;
}

/// Shallow NV layer: measured 2D density of 3.5e11 cm^-2.
inline constexpr double shallow_nv_areal_density = 3.5e11 * 1e4;

/// Lateral spacing used for the dense V_B ensemble recipe (236 ppm, 10 hBN layers).
inline constexpr double dense_vb_lateral_spacing = 1.4e-9;
inline constexpr int dense_vb_layers = 10;

/// Dense V_B ensemble: triangular lattice of defects with `lateral_spacing`, axes along +z.
/// The reference defect sits at the origin at `depth`; every other site occupies one of the
/// hBN layers centred on `depth`, chosen by hashing. Layer pairs whose shallow member would
/// be above the surface are dropped so the mean depth stays `depth`. Sites are generated out
/// to `extent` laterally.
inline DefectLayout dense_ensemble(double depth, double lateral_spacing, double gamma_e, double extent,
                                   std::uint64_t seed = 0, int layers = dense_vb_layers) {
  require(depth > 0.0, "depth > 0");
  require(lateral_spacing > 0.0, "lateral spacing > 0");
  require(extent > 0.0, "extent > 0");
  require(layers >= 1, "layer count >= 1");
  const double c = constants::hbn_interlayer_spacing;
  std::vector<double> depths;
  for (int j = 0; j < layers; ++j) {
    const double offset = (j - 0.5 * (layers - 1)) * c;
    const double mirror = -offset;
    if (depth - std::abs(offset) > 0.0 && depth - std::abs(mirror) > 0.0) depths.push_back(depth + offset);
  }
  if (depths.empty()) depths.push_back(depth);

  DefectLayout l;
  l.gamma_e = gamma_e;
  l.positions.push_back({0.0, 0.0, -depth});
  l.axes.push_back({0.0, 0.0, 1.0});
  const double a = lateral_spacing;
  const double row = a * std::sqrt(3.0) / 2.0;
  const int jmax = static_cast<int>(std::ceil(extent / row)) + 1;
  const int imax = static_cast<int>(std::ceil(extent / a)) + jmax + 1;
  std::uint64_t index = 0;
  for (int j = -jmax; j <= jmax; ++j) {
    for (int i = -imax; i <= imax; ++i) {
      if (i == 0 && j == 0) continue;
      const double x = i * a + j * 0.5 * a;
      const double y = j * row;
      if (x * x + y * y > extent * extent) continue;
      const double u = hashed_uniform(seed, index++, 7);
      const auto layer = std::min(depths.size() - 1, static_cast<std::size_t>(u * static_cast<double>(depths.size())));
      l.positions.push_back({x, y, -depths[layer]});
      l.axes.push_back({0.0, 0.0, 1.0});
    }
  }
  return l;
}

/// Least-squares power law FWHM = prefactor * d^exponent.
struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  std::vector<double> depths;
  std::vector<double> fwhm;
  /// max / min FWHM across the depths; near 1 for a flat linewidth.
  double flatness = 1.0;
};

inline PowerLawFit fit_power_law(const std::vector<double>& depths, const std::vector<double>& fwhm) {
  require(depths.size() == fwhm.size(), "one FWHM per depth");
  require(depths.size() >= 3, "at least three depths");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    require(depths[i] > 0.0 && fwhm[i] > 0.0, "depths and widths positive");
    mx += std::log(depths[i]);
    my += std::log(fwhm[i]);
  }
  const double n = static_cast<double>(depths.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const double dx = std::log(depths[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(fwhm[i]) - my);
  }
  require(sxx > 0.0, "depths not all identical");
  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.prefactor = std::exp(my - f.exponent * mx);
  f.depths = depths;
  f.fwhm = fwhm;
  const auto [lo, hi] = std::minmax_element(fwhm.begin(), fwhm.end());
  f.flatness = *hi / *lo;
  return f;
}

/// FWHM at each depth from `run(depth)`, then the power-law fit.
inline PowerLawFit linewidth_vs_depth(const std::function<Spectrum(double)>& run, const std::vector<double>& depths) {
  require(depths.size() >= 3, "at least three depths");
  std::vector<double> widths;
  widths.reserve(depths.size());
  for (double d : depths) {
    require(d > 0.0, "depths positive");
    widths.push_back(run(d).fwhm);
  }
  return fit_power_law(depths, widths);
}

/// Settings shared by the back-action figure recipes: a proton half-space sampled above one
/// reference defect, amplitude-weighted.
namespace backaction_recipe {

inline constexpr std::size_t sites = 1'000'000;
inline constexpr std::size_t full_sites = 28'000'000;
inline constexpr double proton_density = 64e27;

/// Depths of the linewidth-versus-depth study.
inline std::vector<double> study_depths() { return {1e-9, 2e-9, 3e-9, 5e-9}; }

inline LineshapeOptions options(unsigned threads) {
  LineshapeOptions o;
  o.weighting = Weighting::Amplitude;
  o.threads = threads;
  return o;
}

/// One defect of system `p` at `depth`.
inline Spectrum single(const DefectSystemParams& p, double depth, std::size_t n_sites = sites, unsigned threads = 1) {
  const auto layout = single_defect(depth, p.alpha, p.gamma_e());
  return lineshape(layout, resolved_lattice(depth, proton_density, n_sites), 0, options(threads));
}

/// Dense ensemble around a reference at `depth`, generated far enough out that every spin in
/// the sampling box sees all defects inside the coupling cutoff.
inline DefectLayout dense_layout(const DefectSystemParams& p, double depth, double lateral_spacing) {
  const double extent = default_coupling_cutoff + sampling_box_side(depth) * std::sqrt(0.5);
  return dense_ensemble(depth, lateral_spacing, p.gamma_e(), extent, 0, 1);
}

inline Spectrum dense(const DefectSystemParams& p, double depth, std::size_t n_sites = sites, unsigned threads = 1,
                      double lateral_spacing = dense_vb_lateral_spacing) {
  return lineshape(dense_layout(p, depth, lateral_spacing), resolved_lattice(depth, proton_density, n_sites), 0,
                   options(threads));
}

}  // namespace backaction_recipe

}  // namespace dnmr

#endif
