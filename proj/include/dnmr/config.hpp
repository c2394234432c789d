#ifndef DNMR_CONFIG_HPP
#define DNMR_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dnmr/backaction.hpp"
#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/fewspin.hpp"
#include "dnmr/params.hpp"

namespace dnmr {

enum class BackactionLayout { Single, Dense };
enum class FewSpinTemplate { SingleProton, ProtonCarbon, Custom };

/// Per-subcommand settings that are not part of the sensor or sample records.
struct RunOptions {
  // Frequency sweeps.
  double freq_min = 10e3;
  double freq_max = 100e6;
  std::size_t freq_points = 200;
  double averaging_time = 1.0;
  // Geometry sweep over alpha in [0, pi].
  std::size_t alpha_points = 181;
  double epsilon = 0.0;
  // Back-action.
  std::optional<double> backaction_depth;
  std::vector<double> backaction_depths;
  std::size_t backaction_sites = 1'000'000;
  Weighting backaction_weighting = Weighting::Amplitude;
  BackactionLayout backaction_layout = BackactionLayout::Single;
  double backaction_lateral_spacing = dense_vb_lateral_spacing;
  double backaction_superposition_factor = 0.5;
  double backaction_cutoff = default_coupling_cutoff;
  std::optional<std::uint64_t> backaction_jitter_seed;
  // Contrast-dip lineshape.
  int lineshape_repetitions = 100;
  std::optional<double> lineshape_depth;
  bool lineshape_sensor_decay = true;
  std::size_t lineshape_tau_points = 2001;
  double lineshape_tau_span = 0.3;
  // Few-spin dynamics.
  FewSpinTemplate fewspin_template = FewSpinTemplate::SingleProton;
  bool fewspin_multi_defect = false;
  SweepAxis fewspin_axis = SweepAxis::Z;
  double fewspin_min = 0.5e-9;
  double fewspin_max = 20e-9;
  std::size_t fewspin_points = 40;
  std::vector<int> fewspin_ms = {-1, 0, 1};
  double fewspin_duration = 0.2;
  std::size_t fewspin_steps = 5000;
  double fewspin_j = default_j_coupling_hz;
  bool fewspin_pseudo_secular = true;
  bool fewspin_weak_coupling = false;
  double fewspin_cutoff = 10e-9;
  std::vector<Nucleus> nuclei;
  std::vector<Vec3> defects;
  std::map<std::pair<std::size_t, std::size_t>, double> j_couplings;

  bool operator==(const RunOptions&) const = default;

  void validate() const {
    require(freq_min > 0.0 && freq_max > freq_min && freq_points >= 2, "0 < freq_min < freq_max, freq_points >= 2");
    require(averaging_time > 0.0, "averaging_time > 0");
    require(alpha_points >= 2, "alpha_points >= 2");
    require(epsilon >= 0.0 && epsilon <= 1.0, "0 <= epsilon <= 1");
    require(!backaction_depth || *backaction_depth > 0.0, "backaction depth > 0");
    for (double d : backaction_depths) require(d > 0.0, "backaction depths > 0");
    require(backaction_sites >= 1 && backaction_sites <= default_max_sites, "1 <= backaction_sites <= 3e7");
    require(backaction_lateral_spacing > 0.0, "lateral spacing > 0");
    require(backaction_superposition_factor >= 0.0 && backaction_superposition_factor <= 1.0,
            "superposition factor in [0, 1]");
    require(backaction_cutoff > 0.0, "coupling cutoff > 0");
    require(lineshape_repetitions >= 1, "lineshape repetitions >= 1");
    require(!lineshape_depth || *lineshape_depth > 0.0, "lineshape depth > 0");
    require(lineshape_tau_points >= 3, "lineshape tau points >= 3");
    require(lineshape_tau_span > 0.0 && lineshape_tau_span < 1.0, "0 < lineshape tau span < 1");
    require(fewspin_min > 0.0 && fewspin_max > fewspin_min && fewspin_points >= 2, "valid few-spin range");
    require(!fewspin_ms.empty(), "at least one m_s");
    for (int m : fewspin_ms) require(m >= -1 && m <= 1, "m_s in {-1, 0, +1}");
    require(fewspin_duration > 0.0 && fewspin_steps >= 2, "few-spin duration > 0 and steps >= 2");
    require(fewspin_cutoff > 0.0, "few-spin cutoff > 0");
    require(nuclei.size() <= max_nuclei, "at most 5 nuclei");
  }
};

struct Config {
  DefectSystemParams defect;
  SampleSpec sample;
  RunOptions run;

  bool operator==(const Config&) const = default;

  void validate() const {
    defect.validate();
    sample.validate();
    run.validate();
  }
};

namespace config_detail {

/// SI = value * factor (multiply) or value / factor (divide); exact powers of ten divide.
struct Unit {
  double factor = 1.0;
  bool divide = false;

  double to_si(double x) const { return divide ? x / factor : x * factor; }
  double from_si(double v) const { return divide ? v * factor : v / factor; }
};

inline constexpr Unit one{1.0, false};
inline constexpr Unit micro{1e6, true};
inline constexpr Unit nano{1e9, true};
inline constexpr Unit percent{100.0, true};
inline constexpr Unit mega{1e6, false};
inline constexpr Unit per_nm3{1e27, false};
inline constexpr Unit nm2_per_s{1e18, true};
inline const Unit degree{constants::pi / 180.0, false};

inline std::string shortest(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// Marks a value already in SI units, bypassing the key's unit conversion.
inline constexpr std::string_view si_prefix = "si:";

/// Decimal text that parses back, through `u`, to exactly `si`.

inline std::string format_value(double si, Unit u) {
  if (std::isinf(si)) return shortest(si);
  const double x0 = u.from_si(si);
  double lo = x0, hi = x0;
  for (int i = 0; i <= 64; ++i) {
    for (double c : {hi, lo}) {
      const std::string text = shortest(c);
      double back = 0.0;
      std::from_chars(text.data(), text.data() + text.size(), back);
      if (u.to_si(back) == si) return text;
    }
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
  }
  // No decimal in the key's unit maps back onto this double; write it in SI instead.
  return std::string(si_prefix) + shortest(si);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  Reader(std::string key, Entry entry) : key_(std::move(key)), entry_(std::move(entry)) {}

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(entry_.line, key_ + ": " + what); }

  double number(const std::string& text) const {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) fail("invalid number '" + text + "'");
    return v;
  }
  double scaled(const std::string& text, Unit u) const {
    if (text.rfind(si_prefix, 0) == 0) return number(text.substr(si_prefix.size()));
    return u.to_si(number(text));
  }
  double real(Unit u = one) const { return scaled(entry_.value, u); }
  std::optional<double> optional_real(Unit u) const {
    if (entry_.value == "none") return std::nullopt;
    return real(u);
  }
  std::uint64_t unsigned_integer() const {
    std::uint64_t v = 0;
    const auto& t = entry_.value;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail("invalid non-negative integer '" + t + "'");
    return v;
  }
  int integer() const {
    int v = 0;
    const auto& t = entry_.value;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail("invalid integer '" + t + "'");
    return v;
  }
  bool boolean() const {
    if (entry_.value == "true") return true;
    if (entry_.value == "false") return false;
    fail("expected true or false");
  }
  std::vector<double> reals(Unit u) const {
    std::vector<double> out;
    for (const auto& t : split_list(entry_.value)) out.push_back(scaled(t, u));
    return out;
  }
  std::vector<int> integers() const {
    std::vector<int> out;
    for (const auto& t : split_list(entry_.value)) {
      int v = 0;
      const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail("invalid integer '" + t + "'");
      out.push_back(v);
    }
    return out;
  }
  const std::string& text() const { return entry_.value; }
  int line() const { return entry_.line; }

 private:
  std::string key_;
  Entry entry_;
};

inline std::string weighting_name(Weighting w) {
  switch (w) {
    case Weighting::Uniform: return "uniform";
    case Weighting::Detection: return "detection";
    case Weighting::Amplitude: return "amplitude";
  }
  return "?";
}

inline std::string geometry_name(const SampleGeometry& g) {
  if (std::holds_alternative<Slab>(g)) return "slab";
  if (std::holds_alternative<BulkAverage>(g)) return "bulk_average";
  return "half_space";
}

inline std::string template_name(FewSpinTemplate t) {
  switch (t) {
    case FewSpinTemplate::SingleProton: return "single_proton";
    case FewSpinTemplate::ProtonCarbon: return "proton_carbon";
    case FewSpinTemplate::Custom: return "custom";
  }
  return "?";
}

/// Parses "nucleus3_x_nm" into (3, "x_nm").
inline std::optional<std::pair<std::size_t, std::string>> indexed(const std::string& key, std::string_view prefix) {
  if (key.rfind(prefix, 0) != 0) return std::nullopt;
  const std::string rest = key.substr(prefix.size());
  const auto us = rest.find('_');
  if (us == std::string::npos || us == 0) return std::nullopt;
  std::size_t idx = 0;
  const auto r = std::from_chars(rest.data(), rest.data() + us, idx);
  if (r.ec != std::errc() || r.ptr != rest.data() + us) return std::nullopt;
  return std::make_pair(idx, rest.substr(us + 1));
}

}  // namespace config_detail

/// Parses the flat `key = value` configuration text. `system = <preset>` is required and
/// supplies every value not overridden by another key.
inline Config parse_config(std::string_view text) {
  using namespace config_detail;
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (value.empty()) throw ParseError(line_no, key + ": empty value");
    if (!entries.emplace(key, Entry{value, line_no}).second) throw ParseError(line_no, "duplicate key: " + key);
  }
  const auto sys = entries.find("system");
  if (sys == entries.end()) throw ValidationError("missing required key: system");

  Config cfg;
  try {
    cfg.defect = preset(sys->second.value);
  } catch (const ValidationError& e) {
    throw ParseError(sys->second.line, e.what());
  }

  std::map<std::size_t, Nucleus> nuclei;
  std::map<std::size_t, Vec3> defects;
  RunOptions& run = cfg.run;
  DefectSystemParams& p = cfg.defect;
  SampleSpec& s = cfg.sample;
  std::optional<double> slab_thickness, d_min, d_max;
  std::string geometry = "half_space";

  for (const auto& [key, entry] : entries) {
    const Reader r(key, entry);
    if (key == "system") continue;
    if (key == "name") p.name = r.text();
    else if (key == "host") {
      if (r.text() == "hbn") p.host = Host::HBN;
      else if (r.text() == "diamond") p.host = Host::Diamond;
      else r.fail("expected hbn or diamond");
    } else if (key == "t2_echo_us") p.t2_echo = r.real(micro);
    else if (key == "t2_max_us") p.t2_max = r.real(micro);
    else if (key == "depth_nm") p.depth_min = p.depth_max = r.real(nano);
    else if (key == "depth_min_nm") p.depth_min = r.real(nano);
    else if (key == "depth_max_nm") p.depth_max = r.real(nano);
    else if (key == "contrast_percent") p.contrast0 = r.real(percent);
    else if (key == "counts_per_defect_hz") p.counts_per_defect = r.real();
    else if (key == "density_ppm") p.density_ppm = r.optional_real(one);
    else if (key == "t_init_ns") p.t_init = r.real(nano);
    else if (key == "g_factor") p.g_factor = r.real();
    else if (key == "s_exponent") p.s_exponent = r.real();
    else if (key == "p_stretch") p.p_stretch = r.real();
    else if (key == "alpha_deg") p.alpha = r.real(degree);
    else if (key == "rabi_mhz") p.rabi_hz = r.real(mega);
    else if (key == "sample_species") {
      try {
        s.species = parse_species(r.text());
      } catch (const ValidationError& e) {
        r.fail(e.what());
      }
    } else if (key == "sample_density_per_nm3") s.density = r.real(per_nm3);
    else if (key == "sample_geometry") geometry = r.text();
    else if (key == "sample_slab_thickness_nm") slab_thickness = r.real(nano);
    else if (key == "sample_d_min_nm") d_min = r.real(nano);
    else if (key == "sample_d_max_nm") d_max = r.real(nano);
    else if (key == "sample_diffusion_nm2_per_s") s.diffusion_coeff = r.real(nm2_per_s);
    else if (key == "sample_t2n_us") s.t2n_intrinsic = r.real(micro);
    else if (key == "bias_field_t") s.bias_field = r.real();
    else if (key == "freq_min_hz") run.freq_min = r.real();
    else if (key == "freq_max_hz") run.freq_max = r.real();
    else if (key == "freq_points") run.freq_points = r.unsigned_integer();
    else if (key == "averaging_time_s") run.averaging_time = r.real();
    else if (key == "alpha_points") run.alpha_points = r.unsigned_integer();
    else if (key == "epsilon") run.epsilon = r.real();
    else if (key == "backaction_depth_nm") run.backaction_depth = r.real(nano);
    else if (key == "backaction_depths_nm") run.backaction_depths = r.reals(nano);
    else if (key == "backaction_sites") run.backaction_sites = r.unsigned_integer();
    else if (key == "backaction_weighting") {
      if (r.text() == "uniform") run.backaction_weighting = Weighting::Uniform;
      else if (r.text() == "detection") run.backaction_weighting = Weighting::Detection;
      else if (r.text() == "amplitude") run.backaction_weighting = Weighting::Amplitude;
      else r.fail("expected uniform, detection or amplitude");
    } else if (key == "backaction_layout") {
      if (r.text() == "single") run.backaction_layout = BackactionLayout::Single;
      else if (r.text() == "dense") run.backaction_layout = BackactionLayout::Dense;
      else r.fail("expected single or dense");
    } else if (key == "backaction_lateral_spacing_nm") run.backaction_lateral_spacing = r.real(nano);
    else if (key == "backaction_superposition_factor") run.backaction_superposition_factor = r.real();
    else if (key == "backaction_cutoff_nm") run.backaction_cutoff = r.real(nano);
    else if (key == "backaction_jitter_seed") {
      if (r.text() == "none") run.backaction_jitter_seed.reset();
      else run.backaction_jitter_seed = r.unsigned_integer();
    } else if (key == "lineshape_repetitions") run.lineshape_repetitions = r.integer();
    else if (key == "lineshape_depth_nm") run.lineshape_depth = r.optional_real(nano);
    else if (key == "lineshape_sensor_decay") run.lineshape_sensor_decay = r.boolean();
    else if (key == "lineshape_tau_points") run.lineshape_tau_points = r.unsigned_integer();
    else if (key == "lineshape_tau_span") run.lineshape_tau_span = r.real();
    else if (key == "fewspin_template") {
      if (r.text() == "single_proton") run.fewspin_template = FewSpinTemplate::SingleProton;
      else if (r.text() == "proton_carbon") run.fewspin_template = FewSpinTemplate::ProtonCarbon;
      else if (r.text() == "custom") run.fewspin_template = FewSpinTemplate::Custom;
      else r.fail("expected single_proton, proton_carbon or custom");
    } else if (key == "fewspin_multi_defect") run.fewspin_multi_defect = r.boolean();
    else if (key == "fewspin_axis") {
      if (r.text() == "x") run.fewspin_axis = SweepAxis::X;
      else if (r.text() == "z") run.fewspin_axis = SweepAxis::Z;
      else r.fail("expected x or z");
    } else if (key == "fewspin_min_nm") run.fewspin_min = r.real(nano);
    else if (key == "fewspin_max_nm") run.fewspin_max = r.real(nano);
    else if (key == "fewspin_points") run.fewspin_points = r.unsigned_integer();
    else if (key == "fewspin_ms") run.fewspin_ms = r.integers();
    else if (key == "fewspin_duration_s") run.fewspin_duration = r.real();
    else if (key == "fewspin_steps") run.fewspin_steps = r.unsigned_integer();
    else if (key == "fewspin_j_hz") run.fewspin_j = r.real();
    else if (key == "fewspin_pseudo_secular") run.fewspin_pseudo_secular = r.boolean();
    else if (key == "fewspin_weak_coupling") run.fewspin_weak_coupling = r.boolean();
    else if (key == "fewspin_cutoff_nm") run.fewspin_cutoff = r.real(nano);
    else if (auto n = indexed(key, "nucleus")) {
      Nucleus& nuc = nuclei[n->first];
      if (n->second == "species") {
        try {
          nuc.species = parse_species(r.text());
        } catch (const ValidationError& e) {
          r.fail(e.what());
        }
      } else if (n->second == "x_nm") nuc.position.x = r.real(nano);
      else if (n->second == "y_nm") nuc.position.y = r.real(nano);
      else if (n->second == "z_nm") nuc.position.z = r.real(nano);
      else if (n->second == "shift_ppm") nuc.shift_ppm = r.real();
      else throw ParseError(entry.line, "unknown key: " + key);
    } else if (auto d = indexed(key, "defect")) {
      Vec3& pos = defects[d->first];
      if (d->second == "x_nm") pos.x = r.real(nano);
      else if (d->second == "y_nm") pos.y = r.real(nano);
      else if (d->second == "z_nm") pos.z = r.real(nano);
      else throw ParseError(entry.line, "unknown key: " + key);
    } else if (auto j = indexed(key, "j")) {
      // jA_B_hz
      const auto us = j->second.find('_');
      std::size_t b = 0;
      const std::string& rest = j->second;
      const auto res = std::from_chars(rest.data(), rest.data() + (us == std::string::npos ? 0 : us), b);
      if (us == std::string::npos || res.ec != std::errc() || rest.substr(us + 1) != "hz")
        throw ParseError(entry.line, "unknown key: " + key);
      if (!(j->first < b)) throw ParseError(entry.line, key + ": scalar couplings need i < j");
      run.j_couplings[{j->first, b}] = r.real();
    } else {
      throw ParseError(entry.line, "unknown key: " + key);
    }
  }

  if (geometry == "half_space") s.geometry = HalfSpace{};
  else if (geometry == "slab") s.geometry = Slab{slab_thickness.value_or(1e-9)};
  else if (geometry == "bulk_average") {
    require(d_min && d_max, "bulk_average geometry needs sample_d_min_nm and sample_d_max_nm");
    s.geometry = BulkAverage{*d_min, *d_max, slab_thickness};
  } else {
    throw ParseError(entries["sample_geometry"].line, "sample_geometry: expected half_space, slab or bulk_average");
  }

  std::size_t expect = 0;
  for (const auto& [idx, nuc] : nuclei) {
    if (idx != expect++) throw ValidationError("nucleus indices must be consecutive from 0");
    run.nuclei.push_back(nuc);
  }
  expect = 0;
  for (const auto& [idx, pos] : defects) {
    if (idx != expect++) throw ValidationError("defect indices must be consecutive from 0");
    run.defects.push_back(pos);
  }
  cfg.validate();
  return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file not found: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Configuration text that parse_config turns back into exactly `cfg`. The preset is
/// written as `system` and every field is written explicitly.
inline std::string serialize_config(const Config& cfg) {
  using namespace config_detail;
  std::ostringstream o;
  const auto& p = cfg.defect;
  const auto& s = cfg.sample;
  const auto& r = cfg.run;
  bool known = false;
  for (auto n : preset_names) known = known || n == p.name;
  o << "system = " << (known ? p.name : std::string("vb_gao")) << "\n";
  o << "name = " << p.name << "\n";
  o << "host = " << host_name(p.host) << "\n";
  o << "t2_echo_us = " << format_value(p.t2_echo, micro) << "\n";
  o << "t2_max_us = " << format_value(p.t2_max, micro) << "\n";
  o << "depth_min_nm = " << format_value(p.depth_min, nano) << "\n";
  o << "depth_max_nm = " << format_value(p.depth_max, nano) << "\n";
  o << "contrast_percent = " << format_value(p.contrast0, percent) << "\n";
  o << "counts_per_defect_hz = " << format_value(p.counts_per_defect, one) << "\n";
  o << "density_ppm = " << (p.density_ppm ? format_value(*p.density_ppm, one) : "none") << "\n";
  o << "t_init_ns = " << format_value(p.t_init, nano) << "\n";
  o << "g_factor = " << format_value(p.g_factor, one) << "\n";
  o << "s_exponent = " << format_value(p.s_exponent, one) << "\n";
  o << "p_stretch = " << format_value(p.p_stretch, one) << "\n";
  o << "alpha_deg = " << format_value(p.alpha, degree) << "\n";
  o << "rabi_mhz = " << format_value(p.rabi_hz, mega) << "\n";

  o << "sample_species = " << species_name(s.species) << "\n";
  o << "sample_density_per_nm3 = " << format_value(s.density, per_nm3) << "\n";
  o << "sample_geometry = " << geometry_name(s.geometry) << "\n";
  if (auto* sl = std::get_if<Slab>(&s.geometry))
    o << "sample_slab_thickness_nm = " << format_value(sl->thickness, nano) << "\n";
  if (auto* b = std::get_if<BulkAverage>(&s.geometry)) {
    o << "sample_d_min_nm = " << format_value(b->d_min, nano) << "\n";
    o << "sample_d_max_nm = " << format_value(b->d_max, nano) << "\n";
    if (b->slab_thickness) o << "sample_slab_thickness_nm = " << format_value(*b->slab_thickness, nano) << "\n";
  }
  o << "sample_diffusion_nm2_per_s = " << format_value(s.diffusion_coeff, nm2_per_s) << "\n";
  o << "sample_t2n_us = " << format_value(s.t2n_intrinsic, micro) << "\n";
  o << "bias_field_t = " << format_value(s.bias_field, one) << "\n";

  auto list = [](const std::vector<double>& v, Unit u) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_value(v[i], u);
    return out;
  };
  o << "freq_min_hz = " << format_value(r.freq_min, one) << "\n";
  o << "freq_max_hz = " << format_value(r.freq_max, one) << "\n";
  o << "freq_points = " << r.freq_points << "\n";
  o << "averaging_time_s = " << format_value(r.averaging_time, one) << "\n";
  o << "alpha_points = " << r.alpha_points << "\n";
  o << "epsilon = " << format_value(r.epsilon, one) << "\n";
  if (r.backaction_depth) o << "backaction_depth_nm = " << format_value(*r.backaction_depth, nano) << "\n";
  if (!r.backaction_depths.empty()) o << "backaction_depths_nm = " << list(r.backaction_depths, nano) << "\n";
  o << "backaction_sites = " << r.backaction_sites << "\n";
  o << "backaction_weighting = " << weighting_name(r.backaction_weighting) << "\n";
  o << "backaction_layout = " << (r.backaction_layout == BackactionLayout::Dense ? "dense" : "single") << "\n";
  o << "backaction_lateral_spacing_nm = " << format_value(r.backaction_lateral_spacing, nano) << "\n";
  o << "backaction_superposition_factor = " << format_value(r.backaction_superposition_factor, one) << "\n";
  o << "backaction_cutoff_nm = " << format_value(r.backaction_cutoff, nano) << "\n";
  o << "backaction_jitter_seed = "
    << (r.backaction_jitter_seed ? std::to_string(*r.backaction_jitter_seed) : std::string("none")) << "\n";
  o << "lineshape_repetitions = " << r.lineshape_repetitions << "\n";
  o << "lineshape_depth_nm = " << (r.lineshape_depth ? format_value(*r.lineshape_depth, nano) : "none") << "\n";
  o << "lineshape_sensor_decay = " << (r.lineshape_sensor_decay ? "true" : "false") << "\n";
  o << "lineshape_tau_points = " << r.lineshape_tau_points << "\n";
  o << "lineshape_tau_span = " << format_value(r.lineshape_tau_span, one) << "\n";
  o << "fewspin_template = " << template_name(r.fewspin_template) << "\n";
  o << "fewspin_multi_defect = " << (r.fewspin_multi_defect ? "true" : "false") << "\n";
  o << "fewspin_axis = " << (r.fewspin_axis == SweepAxis::X ? "x" : "z") << "\n";
  o << "fewspin_min_nm = " << format_value(r.fewspin_min, nano) << "\n";
  o << "fewspin_max_nm = " << format_value(r.fewspin_max, nano) << "\n";
  o << "fewspin_points = " << r.fewspin_points << "\n";
  o << "fewspin_ms = ";
  for (std::size_t i = 0; i < r.fewspin_ms.size(); ++i) o << (i ? ", " : "") << r.fewspin_ms[i];
  o << "\n";
  o << "fewspin_duration_s = " << format_value(r.fewspin_duration, one) << "\n";
  o << "fewspin_steps = " << r.fewspin_steps << "\n";
  o << "fewspin_j_hz = " << format_value(r.fewspin_j, one) << "\n";
  o << "fewspin_pseudo_secular = " << (r.fewspin_pseudo_secular ? "true" : "false") << "\n";
  o << "fewspin_weak_coupling = " << (r.fewspin_weak_coupling ? "true" : "false") << "\n";
  o << "fewspin_cutoff_nm = " << format_value(r.fewspin_cutoff, nano) << "\n";
  for (std::size_t i = 0; i < r.nuclei.size(); ++i) {
    const auto& n = r.nuclei[i];
    const std::string k = "nucleus" + std::to_string(i) + "_";
    o << k << "species = " << species_name(n.species) << "\n";
    o << k << "x_nm = " << format_value(n.position.x, nano) << "\n";
    o << k << "y_nm = " << format_value(n.position.y, nano) << "\n";
    o << k << "z_nm = " << format_value(n.position.z, nano) << "\n";
    o << k << "shift_ppm = " << format_value(n.shift_ppm, one) << "\n";
  }
  for (std::size_t i = 0; i < r.defects.size(); ++i) {
    const std::string k = "defect" + std::to_string(i) + "_";
    o << k << "x_nm = " << format_value(r.defects[i].x, nano) << "\n";
    o << k << "y_nm = " << format_value(r.defects[i].y, nano) << "\n";
    o << k << "z_nm = " << format_value(r.defects[i].z, nano) << "\n";
  }
  for (const auto& [key, value] : r.j_couplings)
    o << "j" << key.first << "_" << key.second << "_hz = " << format_value(value, one) << "\n";
  return o.str();
}

/// Config whose defect record is the named preset and everything else is default.
inline Config preset_config(std::string_view name) {
  Config c;
  c.defect = preset(name);
  return c;
}

/// The few-spin system described by the run options.
inline SpinSystem spin_system_from(const Config& cfg) {
  const auto& r = cfg.run;
  SpinSystem s;
  switch (r.fewspin_template) {
    case FewSpinTemplate::SingleProton: s = single_proton_system(); break;
    case FewSpinTemplate::ProtonCarbon: s = proton_carbon_system(r.fewspin_j); break;
    case FewSpinTemplate::Custom:
      require(!r.nuclei.empty(), "custom few-spin template needs nucleusN_* keys");
      s.nuclei = r.nuclei;
      s.j_couplings = r.j_couplings;
      s.defects = {Vec3{0.0, 0.0, -2.5e-9}};
      break;
  }
  if (!r.defects.empty()) s.defects = r.defects;
  s.g_factor = cfg.defect.g_factor;
  s.bias_field = cfg.sample.bias_field;
  s.pseudo_secular = r.fewspin_pseudo_secular;
  s.weak_coupling = r.fewspin_weak_coupling;
  s.coupling_cutoff = r.fewspin_cutoff;
  return s;
}

}  // namespace dnmr

#endif
