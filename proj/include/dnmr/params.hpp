#ifndef DNMR_PARAMS_HPP
#define DNMR_PARAMS_HPP

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"

namespace dnmr {

enum class Host { HBN, Diamond };

inline std::string_view host_name(Host h) { return h == Host::HBN ? "hbn" : "diamond"; }

inline double host_atomic_density(Host h) {
  return h == Host::HBN ? constants::hbn_atomic_density : constants::diamond_atomic_density;
}

/// ppm of lattice sites to defects / m^3. Monotone in ppm.
inline double ppm_to_density(double ppm, Host host) { return ppm * 1e-6 * host_atomic_density(host); }

/// Quantization axis angle from the surface normal for NV centres in [100]/[110] diamond.
inline const double nv_alpha = std::acos(1.0 / std::sqrt(3.0));

/// One sensor system. All fields SI.
struct DefectSystemParams {
  std::string name;
  Host host = Host::HBN;
  double t2_echo = 0.0;
  double t2_max = 0.0;
  double depth_min = 0.0;
  double depth_max = 0.0;
  double contrast0 = 0.0;
  double counts_per_defect = 0.0;
  /// nullopt: a single defect, normalised as one defect per cubic micron.
  std::optional<double> density_ppm;
  double t_init = 0.0;
  double g_factor = 2.0;
  double s_exponent = 0.5;
  double p_stretch = 1.0;
  double alpha = 0.0;
  double rabi_hz = 10e6;

  /// Defects per m^3.
  double defect_density() const {
    return density_ppm ? ppm_to_density(*density_ppm, host) : 1e18;
  }
  /// Defects in one cubic micron.
  double defects_per_um3() const { return defect_density() * 1e-18; }
  double gamma_e() const { return constants::gamma_e_from_g(g_factor); }
  bool has_depth_range() const { return depth_max > depth_min; }
  double mean_depth() const { return 0.5 * (depth_min + depth_max); }
  /// pi-pulse duration.
  double t_pi() const { return 1.0 / (2.0 * rabi_hz); }

  bool operator==(const DefectSystemParams&) const = default;

  void validate() const {
    require(t2_echo > 0.0, "t2_echo > 0");
    require(t2_max >= t2_echo, "t2_max >= t2_echo");
    require(contrast0 > 0.0 && contrast0 < 1.0, "0 < contrast0 < 1");
    require(s_exponent > 0.0 && s_exponent < 1.0, "0 < s_exponent < 1");
    require(p_stretch > 0.0, "p_stretch > 0");
    require(alpha >= 0.0 && alpha <= constants::pi / 2.0 + 1e-15, "0 <= alpha <= pi/2");
    require(depth_min > 0.0, "depth_min > 0");
    require(depth_min <= depth_max, "depth_min <= depth_max");
    require(counts_per_defect > 0.0, "counts_per_defect > 0");
    require(t_init > 0.0, "t_init > 0");
    require(g_factor > 0.0, "g_factor > 0");
    require(rabi_hz > 0.0, "rabi_hz > 0");
    require(!density_ppm || *density_ppm > 0.0, "density_ppm > 0");
  }
};

inline constexpr std::array<std::string_view, 5> preset_names = {
    "vb_gao", "vb_aggregated", "single_nv", "shallow_nv", "bulk_nv"};

namespace detail {

inline DefectSystemParams vb_base() {
  DefectSystemParams p;
  p.host = Host::HBN;
  p.t2_max = 4.4e-6;
  p.depth_min = p.depth_max = 2.5e-9;
  p.t_init = 100e-9;
  p.g_factor = 2.001;
  p.s_exponent = 0.52;
  p.p_stretch = 1.0;
  p.alpha = 0.0;
  p.rabi_hz = std::sqrt(3.0) * 10e6;
  return p;
}

inline DefectSystemParams nv_base() {
  DefectSystemParams p;
  p.host = Host::Diamond;
  p.depth_min = p.depth_max = 10e-9;
  p.t_init = 2000e-9;
  p.g_factor = 2.003;
  p.p_stretch = 1.0;
  p.alpha = nv_alpha;
  p.rabi_hz = 10e6;
  return p;
}

}  // namespace detail

/// The five tabulated sensor systems.
inline DefectSystemParams preset(std::string_view name) {
  if (name == "vb_gao") {
    auto p = detail::vb_base();
    p.name = "vb_gao";
    p.t2_echo = 1.1e-6;
    p.contrast0 = 0.0425;
    p.counts_per_defect = 87.5;
    p.density_ppm = 192.0;
    return p;
  }
  if (name == "vb_aggregated") {
    auto p = detail::vb_base();
    p.name = "vb_aggregated";
    p.t2_echo = 2e-6;
    p.contrast0 = 0.18;
    p.counts_per_defect = 6000.0;
    p.density_ppm = 236.0;
    return p;
  }
  if (name == "single_nv") {
    auto p = detail::nv_base();
    p.name = "single_nv";
    p.t2_echo = 4e-6;
    p.t2_max = 50e-6;
    p.contrast0 = 0.27;
    p.counts_per_defect = 1e6;
    p.density_ppm = std::nullopt;
    p.s_exponent = 0.5;
    p.p_stretch = 2.0;
    return p;
  }
  if (name == "shallow_nv") {
    auto p = detail::nv_base();
    p.name = "shallow_nv";
    p.t2_echo = 1.62e-6;
    p.t2_max = 45.6e-6;
    p.contrast0 = 0.09;
    p.counts_per_defect = 50000.0;
    p.density_ppm = 0.6;
    p.s_exponent = 0.58;
    return p;
  }
  if (name == "bulk_nv") {
    auto p = detail::nv_base();
    p.name = "bulk_nv";
    p.t2_echo = 10.7e-6;
    p.t2_max = 77e-6;
    p.depth_min = 10e-9;
    p.depth_max = 10e-6;
    p.contrast0 = 0.09;
    p.counts_per_defect = 50000.0;
    p.density_ppm = 2.7;
    p.s_exponent = 0.44;
    return p;
  }
  throw ValidationError("unknown preset: " + std::string(name));
}

// Sample geometries.
struct HalfSpace {
  bool operator==(const HalfSpace&) const = default;
};
struct Slab {
  double thickness = 1e-9;
  bool operator==(const Slab&) const = default;
};
/// Sensor depths spread uniformly over [d_min, d_max]; optional thin sample layer.
struct BulkAverage {
  double d_min = 0.0;
  double d_max = 0.0;
  std::optional<double> slab_thickness;
  bool operator==(const BulkAverage&) const = default;
};
using SampleGeometry = std::variant<HalfSpace, Slab, BulkAverage>;

inline constexpr double infinite_time = std::numeric_limits<double>::infinity();

/// Nuclear-spin sample.
struct SampleSpec {
  Species species = Species::H1;
  double density = 64e27;  ///< spins / m^3
  SampleGeometry geometry = HalfSpace{};
  double diffusion_coeff = 0.0;  ///< m^2/s, 0 = frozen
  double t2n_intrinsic = infinite_time;
  double bias_field = 0.1;  ///< T

  bool operator==(const SampleSpec&) const = default;

  void validate() const {
    require(density > 0.0, "sample density > 0");
    require(diffusion_coeff >= 0.0, "diffusion coefficient >= 0");
    require(t2n_intrinsic > 0.0, "t2n_intrinsic > 0");
    require(bias_field >= 0.0, "bias field >= 0");
    if (auto* s = std::get_if<Slab>(&geometry)) require(s->thickness > 0.0, "slab thickness > 0");
    if (auto* b = std::get_if<BulkAverage>(&geometry)) {
      require(b->d_min > 0.0 && b->d_min < b->d_max, "0 < d_min < d_max");
      require(!b->slab_thickness || *b->slab_thickness > 0.0, "slab thickness > 0");
    }
  }
};

/// Sample presets used by the figure recipes.
namespace samples {

/// Protons at 64 nm^-3 filling the half-space above the sensor surface.
inline SampleSpec proton_half_space() { return SampleSpec{}; }

/// 1 nm proton layer on the surface.
inline SampleSpec proton_monolayer() {
  SampleSpec s;
  s.geometry = Slab{1e-9};
  return s;
}

/// Immersion oil, bulk diffusion.
inline SampleSpec immersion_oil() {
  SampleSpec s;
  s.density = 1e27;
  s.diffusion_coeff = 5e5 * 1e-18;
  s.bias_field = 0.0197;
  return s;
}

/// Water confined in an hBN nanowell.
inline SampleSpec nanowell() {
  SampleSpec s = immersion_oil();
  s.diffusion_coeff = 0.038 * 1e-18;
  return s;
}

}  // namespace samples

}  // namespace dnmr

#endif
