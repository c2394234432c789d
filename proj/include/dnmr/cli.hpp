#ifndef DNMR_CLI_HPP
#define DNMR_CLI_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnmr/backaction.hpp"
#include "dnmr/config.hpp"
#include "dnmr/csv.hpp"
#include "dnmr/diffusion.hpp"
#include "dnmr/fewspin.hpp"
#include "dnmr/geometry.hpp"
#include "dnmr/parallel.hpp"
#include "dnmr/params.hpp"
#include "dnmr/sensitivity.hpp"
#include "dnmr/snr.hpp"
#include "dnmr/svg.hpp"

namespace dnmr::cli {

inline constexpr const char* tool_version = "1.0.0";

inline const std::vector<std::string> figure_ids = {"3a", "3b", "3c", "5", "6", "7", "s4", "s5", "s6", "s7", "s8", "s9"};

/// Flags shared by every subcommand.
struct Options {
  std::optional<std::string> config_path;
  std::string system = "vb_aggregated";
  std::string out_dir = ".";
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  bool full = false;
};

/// State of one invocation: resolved config, flags and the files written so far.
class Run {
 public:
  Run(std::string subcommand, Config cfg, Options opt)
      : subcommand_(std::move(subcommand)), cfg_(std::move(cfg)), opt_(std::move(opt)) {
    if (opt_.threads == 0) opt_.threads = default_threads();
    std::filesystem::create_directories(opt_.out_dir);
  }

  const Config& config() const { return cfg_; }
  const Options& options() const { return opt_; }
  unsigned threads() const { return opt_.threads; }
  std::size_t backaction_sites() const {
    return opt_.full ? backaction_recipe::full_sites : cfg_.run.backaction_sites;
  }
  std::size_t recipe_sites() const { return opt_.full ? backaction_recipe::full_sites : backaction_recipe::sites; }

  void csv(const std::string& name, const Table& t) {
    const auto path = std::filesystem::path(opt_.out_dir) / (name + ".csv");
    write_csv(path, t);
    outputs_.push_back(path.string());
  }

  void svg(const std::string& name, const std::vector<Series>& series, const PlotStyle& style) {
    if (!opt_.svg) return;
    const auto path = std::filesystem::path(opt_.out_dir) / (name + ".svg");
    write_text(path, render_svg(series, style));
    outputs_.push_back(path.string());
  }

  void set_figure(std::string id) { figure_ = std::move(id); }

  void write_manifest(double wall_seconds) const {
    nlohmann::ordered_json m;
    m["subcommand"] = subcommand_;
    if (!figure_.empty()) m["figure"] = figure_;
    m["tool_version"] = tool_version;
    m["config"] = serialize_config(cfg_);
    m["seed"] = opt_.seed ? nlohmann::json(*opt_.seed) : nlohmann::json(nullptr);
    m["threads"] = opt_.threads;
    m["full"] = opt_.full;
    m["wall_clock_s"] = wall_seconds;
    m["outputs"] = outputs_;
    write_text(std::filesystem::path(opt_.out_dir) / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::string figure_;
  Config cfg_;
  Options opt_;
  std::vector<std::string> outputs_;
};

namespace detail {

inline std::int64_t flag(bool b) { return b ? 1 : 0; }

inline std::vector<double> frequency_grid(const RunOptions& r) { return log_grid(r.freq_min, r.freq_max, r.freq_points); }

inline std::vector<DefectSystemParams> all_presets() {
  std::vector<DefectSystemParams> out;
  for (auto name : preset_names) out.push_back(preset(name));
  return out;
}

inline std::vector<double> alpha_grid(double hi, std::size_t n) {
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = hi * static_cast<double>(i) / static_cast<double>(n - 1);
  a.back() = hi;
  return a;
}

inline Table spectrum_table(const Spectrum& s) {
  Table t{{"freq_hz", "amplitude"}, {}};
  for (std::size_t i = 0; i < s.freq.size(); ++i) t.add({s.freq[i], s.amplitude[i]});
  return t;
}

inline Series spectrum_series(const std::string& label, const Spectrum& s) { return {label, s.freq, s.amplitude}; }

inline Table shift_table(const std::vector<ShiftRow>& rows) {
  Table t{{"position_m", "m_s", "peak_hz", "aliased"}, {}};
  for (const auto& r : rows)
    for (double p : r.peaks) t.add({r.position, std::int64_t{r.m_s}, p, flag(r.aliased)});
  return t;
}

inline std::vector<Series> shift_series(const std::string& prefix, const std::vector<ShiftRow>& rows) {
  std::vector<Series> out;
  for (int ms : {-1, 0, 1}) {
    Series s{prefix + " m_s=" + std::to_string(ms), {}, {}};
    for (const auto& r : rows)
      if (r.m_s == ms && !r.peaks.empty()) {
        s.x.push_back(r.position * 1e9);
        s.y.push_back(r.peaks.front());
      }
    if (!s.x.empty()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// ---- subcommands ----

inline void run_sensitivity(Run& run) {
  const auto& cfg = run.config();
  const auto grid = detail::frequency_grid(cfg.run);
  const auto pts = sweep_sensitivity(cfg.defect, grid, run.threads());
  Table t{{"frequency_hz", "eta_vol_T_um1p5_per_rtHz", "k", "tau_full_s", "tau_effective_s", "t_r_s", "contrast_avg",
           "exp_term", "feasible"},
          {}};
  Series s{cfg.defect.name, {}, {}};
  for (const auto& p : pts) {
    t.add({p.frequency, p.eta_vol, std::int64_t{p.k}, p.tau_full, p.tau_effective, p.t_r, p.contrast_avg, p.exp_term,
           detail::flag(p.feasible)});
    s.x.push_back(p.frequency);
    s.y.push_back(p.eta_vol);
  }
  run.csv("sensitivity", t);
  run.svg("sensitivity", {s}, {"Volume-normalised AC sensitivity", "frequency (Hz)", "eta_vol (T um^1.5 / rtHz)", true, true});
}

inline void run_snr(Run& run, std::ostream& err) {
  const auto& cfg = run.config();
  const auto rows = sweep_snr(cfg.defect, cfg.sample, detail::frequency_grid(cfg.run), cfg.run.averaging_time, run.threads());
  Table t{{"frequency_hz", "eta", "b_rms_T", "snr", "geometry", "depth_m"}, {}};
  Series s{cfg.defect.name, {}, {}};
  bool warned = false;
  for (const auto& r : rows) {
    t.add({r.frequency, r.eta, r.b_rms, r.snr, r.geometry, r.depth});
    s.x.push_back(r.frequency);
    s.y.push_back(r.snr > 0.0 ? r.snr : std::numeric_limits<double>::quiet_NaN());
    warned = warned || r.warning;
  }
  if (warned) err << "warning: sample layer thicker than d_min/5; thin-layer approximation is marginal\n";
  run.csv("snr", t);
  run.svg("snr", {s}, {"Single-shot SNR", "frequency (Hz)", "SNR", true, true});
}

inline void run_geometry(Run& run) {
  const auto& r = run.config().run;
  const auto alphas = detail::alpha_grid(constants::pi, r.alpha_points);
  Table t{{"alpha_rad", "alpha_deg", "g_transverse", "g_longitudinal", "g_statistical"}, {}};
  Series gt{"transverse", {}, {}}, gl{"longitudinal", {}, {}}, gs{"statistical", {}, {}};
  for (double a : alphas) {
    const double deg = a * 180.0 / constants::pi;
    t.add({a, deg, g_transverse(a, r.epsilon), g_longitudinal(a), g_statistical(a)});
    gt.x.push_back(deg);
    gt.y.push_back(g_transverse(a, r.epsilon));
    gl.x.push_back(deg);
    gl.y.push_back(g_longitudinal(a));
    gs.x.push_back(deg);
    gs.y.push_back(g_statistical(a));
  }
  run.csv("geometry", t);
  run.svg("geometry", {gt, gl, gs}, {"Geometry factors", "alpha (deg)", "G", false, false});
}

inline Spectrum backaction_at(const Run& run, double depth) {
  const auto& cfg = run.config();
  const auto& r = cfg.run;
  DefectLayout layout;
  if (r.backaction_layout == BackactionLayout::Dense) {
    const double extent = r.backaction_cutoff + sampling_box_side(depth) * std::sqrt(0.5);
    layout = dense_ensemble(depth, r.backaction_lateral_spacing, cfg.defect.gamma_e(), extent,
                            run.options().seed.value_or(0), 1);
    for (auto& a : layout.axes) a = axis_from_alpha(cfg.defect.alpha);
  } else {
    layout = single_defect(depth, cfg.defect.alpha, cfg.defect.gamma_e());
  }
  layout.superposition_factor = r.backaction_superposition_factor;
  layout.coupling_cutoff = r.backaction_cutoff;
  const auto jitter = run.options().seed ? run.options().seed : r.backaction_jitter_seed;
  const auto lattice = resolved_lattice(depth, cfg.sample.density, run.backaction_sites(), jitter);
  LineshapeOptions opt;
  opt.species = cfg.sample.species;
  opt.weighting = r.backaction_weighting;
  opt.threads = run.threads();
  return lineshape(layout, lattice, 0, opt);
}

inline void run_backaction(Run& run) {
  const auto& cfg = run.config();
  const auto& r = cfg.run;
  std::vector<double> depths = r.backaction_depths;
  const double primary = r.backaction_depth ? *r.backaction_depth : depths.empty() ? cfg.defect.depth_min : depths.front();
  if (depths.empty()) depths = {primary};
  Table summary{{"depth_m", "fwhm_hz", "mean_shift_hz"}, {}};
  std::vector<double> widths;
  for (double d : depths) {
    const Spectrum s = backaction_at(run, d);
    summary.add({d, s.fwhm, s.mean_shift});
    widths.push_back(s.fwhm);
    if (d == primary) {
      run.csv("backaction_spectrum", detail::spectrum_table(s));
      run.svg("backaction_spectrum", {detail::spectrum_series(cfg.defect.name, s)},
              {"Back-action lineshape", "shift (Hz)", "amplitude", false, false});
    }
  }
  if (std::find(depths.begin(), depths.end(), primary) == depths.end()) {
    const Spectrum s = backaction_at(run, primary);
    run.csv("backaction_spectrum", detail::spectrum_table(s));
  }
  run.csv("backaction_summary", summary);
  if (depths.size() >= 3) {
    const auto fit = fit_power_law(depths, widths);
    Table t{{"exponent", "prefactor_hz_m", "flatness"}, {}};
    t.add({fit.exponent, fit.prefactor, fit.flatness});
    run.csv("backaction_fit", t);
  }
}

inline void run_fewspin(Run& run) {
  const auto& cfg = run.config();
  const auto& r = cfg.run;
  const SpinSystem tmpl = spin_system_from(cfg);
  FewSpinRun fr;
  fr.duration = r.fewspin_duration;
  fr.steps = r.fewspin_steps;
  fr.threads = run.threads();
  const auto rows = r.fewspin_multi_defect
                        ? multi_defect_shift(tmpl, four_defect_cluster(), r.fewspin_axis, r.fewspin_min,
                                             r.fewspin_max, r.fewspin_points, r.fewspin_ms, fr)
                        : shift_vs_distance(tmpl, r.fewspin_axis, r.fewspin_min, r.fewspin_max, r.fewspin_points,
                                            r.fewspin_ms, fr);
  run.csv("fewspin", detail::shift_table(rows));
  const auto series = detail::shift_series("peak", rows);
  if (!series.empty()) run.svg("fewspin", series, {"Few-spin peak positions", "distance (nm)", "peak (Hz)", false, false});
}

inline LineshapeConfig lineshape_config(const Config& cfg) {
  const auto& r = cfg.run;
  LineshapeConfig c;
  c.defect = cfg.defect;
  c.sample = cfg.sample;
  c.k = xy8_pulses(r.lineshape_repetitions);
  c.depth = r.lineshape_depth;
  c.sensor_decay = r.lineshape_sensor_decay;
  c.tau_grid = resonance_tau_grid(larmor_frequency(cfg.sample), r.lineshape_tau_span, r.lineshape_tau_points);
  return c;
}

inline void run_lineshape(Run& run) {
  const auto c = lineshape_config(run.config());
  const auto curve = contrast_curve(c, run.threads());
  Table t{{"tau_s", "contrast", "equivalent_freq_hz"}, {}};
  Series s{c.defect.name, {}, {}};
  for (const auto& p : curve) {
    t.add({p.tau, p.contrast, p.equivalent_freq});
    s.x.push_back(p.tau);
    s.y.push_back(p.contrast);
  }
  run.csv("lineshape", t);
  const auto m = dip_metrics(curve);
  Table summary{{"tau_center_s", "dip_depth", "fwhm_hz", "t2n_s", "correlation_time_s"}, {}};
  summary.add({m.tau_center, m.depth, m.fwhm_hz, c.t2n(), correlation_time(c.sensor_depth(), c.sample.diffusion_coeff)});
  run.csv("lineshape_summary", summary);
  run.svg("lineshape", {s}, {"XY8 contrast dip", "tau (s)", "contrast", false, false});
}

// ---- figure recipes ----

inline void figure_3a(Run& run) {
  const auto grid = default_frequency_grid();
  Table t{{"frequency_hz"}, {}};
  std::vector<std::vector<SensitivityPoint>> cols;
  std::vector<Series> series;
  for (const auto& p : detail::all_presets()) {
    t.columns.push_back("eta_vol_" + p.name + "_T_um1p5_per_rtHz");
    cols.push_back(sweep_sensitivity(p, grid, run.threads()));
    Series s{p.name, grid, {}};
    for (const auto& pt : cols.back()) s.y.push_back(pt.eta_vol);
    series.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i]};
    for (const auto& c : cols) row.push_back(c[i].eta_vol);
    t.add(std::move(row));
  }
  run.csv("fig3a", t);
  run.svg("fig3a", series, {"Volume-normalised sensitivity", "frequency (Hz)", "eta_vol (T um^1.5 / rtHz)", true, true});
}

inline void figure_snr(Run& run, const std::string& name, const SampleSpec& sample, const std::string& title) {
  const auto grid = default_frequency_grid();
  Table t{{"frequency_hz"}, {}};
  std::vector<std::vector<SnrRow>> cols;
  std::vector<Series> series;
  for (const auto& p : detail::all_presets()) {
    t.columns.push_back("snr_" + p.name);
    cols.push_back(sweep_snr(p, sample, grid, 1.0, run.threads()));
    Series s{p.name, grid, {}};
    for (const auto& r : cols.back()) s.y.push_back(r.snr > 0.0 ? r.snr : std::numeric_limits<double>::quiet_NaN());
    series.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i]};
    for (const auto& c : cols) row.push_back(c[i].snr);
    t.add(std::move(row));
  }
  run.csv(name, t);
  run.svg(name, series, {title, "frequency (Hz)", "SNR (1 s)", true, true});
}

inline void figure_5(Run& run) {
  struct Panel {
    std::string label;
    const char* system;
    double depth;
  };
  const std::vector<Panel> panels = {{"nv_1nm", "single_nv", 1e-9},
                                     {"vb_1nm", "vb_aggregated", 1e-9},
                                     {"nv_5nm", "single_nv", 5e-9},
                                     {"vb_5nm", "vb_aggregated", 5e-9}};
  Table summary{{"panel", "depth_m", "fwhm_hz", "mean_shift_hz"}, {}};
  for (const auto& p : panels) {
    const Spectrum s = backaction_recipe::single(preset(p.system), p.depth, run.recipe_sites(), run.threads());
    summary.add({p.label, p.depth, s.fwhm, s.mean_shift});
    run.csv("fig5_" + p.label, detail::spectrum_table(s));
    run.svg("fig5_" + p.label, {detail::spectrum_series(p.label, s)}, {"Back-action lineshape " + p.label, "shift (Hz)",
                                                                       "amplitude", false, false});
  }
  run.csv("fig5_summary", summary);
}

inline void figure_6(Run& run) {
  const auto depths = backaction_recipe::study_depths();
  const auto nv = preset("single_nv"), vb = preset("vb_aggregated");
  Table t{{"system", "depth_m", "fwhm_hz", "mean_shift_hz"}, {}};
  Table fits{{"system", "exponent", "prefactor_hz_m", "flatness"}, {}};
  std::vector<Series> series;
  auto study = [&](const std::string& label, const std::function<Spectrum(double)>& fn) {
    Series s{label, {}, {}};
    std::vector<double> widths;
    for (double d : depths) {
      const Spectrum sp = fn(d);
      t.add({label, d, sp.fwhm, sp.mean_shift});
      widths.push_back(sp.fwhm);
      s.x.push_back(d * 1e9);
      s.y.push_back(sp.fwhm);
    }
    const auto fit = fit_power_law(depths, widths);
    fits.add({label, fit.exponent, fit.prefactor, fit.flatness});
    series.push_back(std::move(s));
  };
  const std::size_t n = run.recipe_sites();
  const unsigned th = run.threads();
  study("single_nv", [&](double d) { return backaction_recipe::single(nv, d, n, th); });
  study("single_vb", [&](double d) { return backaction_recipe::single(vb, d, n, th); });
  study("dense_vb", [&](double d) { return backaction_recipe::dense(vb, d, n, th); });
  run.csv("fig6", t);
  run.csv("fig6_fit", fits);
  run.svg("fig6", series, {"Back-action linewidth vs depth", "depth (nm)", "FWHM (Hz)", true, true});
}

inline void figure_7(Run& run) {
  SampleSpec frozen = samples::immersion_oil();
  frozen.diffusion_coeff = 0.0;
  struct Case {
    std::string label;
    SampleSpec sample;
  };
  const std::vector<Case> cases = {{"frozen", frozen}, {"oil", samples::immersion_oil()}, {"nanowell", samples::nanowell()}};
  Table t{{"tau_s", "equivalent_freq_hz"}, {}};
  Table summary{{"sensor", "sample", "tau_center_s", "dip_depth", "fwhm_hz", "correlation_time_s"}, {}};
  std::vector<std::vector<ContrastPoint>> curves;
  std::vector<Series> series;
  for (const auto& c : cases) {
    for (const char* sensor : {"vb", "nv"}) {
      const auto cfg = std::string(sensor) == "vb" ? lineshape_recipe::vb(c.sample) : lineshape_recipe::nv(c.sample);
      curves.push_back(contrast_curve(cfg, run.threads()));
      const auto m = dip_metrics(curves.back());
      summary.add({std::string(sensor), c.label, m.tau_center, m.depth, m.fwhm_hz,
                   correlation_time(cfg.sensor_depth(), cfg.sample.diffusion_coeff)});
      t.columns.push_back("contrast_" + std::string(sensor) + "_" + c.label);
      Series s{std::string(sensor) + " " + c.label, {}, {}};
      for (const auto& p : curves.back()) {
        s.x.push_back(p.equivalent_freq);
        s.y.push_back(p.contrast);
      }
      series.push_back(std::move(s));
    }
  }
  for (std::size_t i = 0; i < curves.front().size(); ++i) {
    std::vector<Cell> row{curves.front()[i].tau, curves.front()[i].equivalent_freq};
    for (const auto& c : curves) row.push_back(c[i].contrast);
    t.add(std::move(row));
  }
  run.csv("fig7", t);
  run.csv("fig7_summary", summary);
  run.svg("fig7", series, {"XY8-100 contrast dips", "equivalent frequency (Hz)", "contrast", false, false});
}

inline void figure_s4(Run& run) {
  const auto grid = default_frequency_grid();
  Table t{{"frequency_hz"}, {}};
  std::vector<std::vector<SensitivityPoint>> cols;
  std::vector<Series> series;
  for (const auto& p : detail::all_presets()) {
    t.columns.push_back("k_" + p.name);
    t.columns.push_back("t_r_" + p.name + "_s");
    cols.push_back(sweep_sensitivity(p, grid, run.threads()));
    Series s{p.name, grid, {}};
    for (const auto& pt : cols.back()) s.y.push_back(pt.k);
    series.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i]};
    for (const auto& c : cols) {
      row.push_back(std::int64_t{c[i].k});
      row.push_back(c[i].t_r);
    }
    t.add(std::move(row));
  }
  run.csv("figs4", t);
  run.svg("figs4", series, {"Optimal pulse count", "frequency (Hz)", "k", true, true});
}

inline void figure_s5(Run& run) {
  const auto grid = default_frequency_grid();
  Table t{{"frequency_hz"}, {}};
  std::vector<std::vector<SensitivityPoint>> cols;
  std::vector<Series> series;
  for (const auto& p : detail::all_presets()) {
    t.columns.push_back("exp_term_" + p.name);
    cols.push_back(sweep_sensitivity(p, grid, run.threads()));
    Series s{p.name, grid, {}};
    for (const auto& pt : cols.back()) s.y.push_back(pt.exp_term > 0.0 ? pt.exp_term : std::numeric_limits<double>::quiet_NaN());
    series.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<Cell> row{grid[i]};
    for (const auto& c : cols) row.push_back(c[i].exp_term);
    t.add(std::move(row));
  }
  run.csv("figs5", t);
  run.svg("figs5", series, {"Coherence decay factor", "frequency (Hz)", "exp term", true, false});
}

inline void figure_s6(Run& run) {
  const auto alphas = detail::alpha_grid(constants::pi / 2.0, 91);
  Table t{{"alpha_deg", "g_transverse", "g_longitudinal", "g_statistical"}, {}};
  Series gt{"transverse", {}, {}}, gl{"longitudinal", {}, {}}, gs{"statistical", {}, {}};
  for (double a : alphas) {
    const double deg = a * 180.0 / constants::pi;
    t.add({deg, g_transverse(a), g_longitudinal(a), g_statistical(a)});
    for (auto* s : {&gt, &gl, &gs}) s->x.push_back(deg);
    gt.y.push_back(g_transverse(a));
    gl.y.push_back(g_longitudinal(a));
    gs.y.push_back(g_statistical(a));
  }
  run.csv("figs6", t);
  run.svg("figs6", {gt, gl, gs}, {"Geometry factors", "alpha (deg)", "G", false, false});
}

inline void figure_s7(Run& run) {
  const auto vb = preset("vb_aggregated");
  Table summary{{"panel", "depth_m", "fwhm_hz", "mean_shift_hz"}, {}};
  for (double d : {1e-9, 5e-9}) {
    const std::string tag = d < 2e-9 ? "1nm" : "5nm";
    const Spectrum single = backaction_recipe::single(vb, d, run.recipe_sites(), run.threads());
    const Spectrum dense = backaction_recipe::dense(vb, d, run.recipe_sites(), run.threads());
    summary.add({"single_" + tag, d, single.fwhm, single.mean_shift});
    summary.add({"dense_" + tag, d, dense.fwhm, dense.mean_shift});
    run.csv("figs7_single_" + tag, detail::spectrum_table(single));
    run.csv("figs7_dense_" + tag, detail::spectrum_table(dense));
    run.svg("figs7_" + tag, {detail::spectrum_series("single", single), detail::spectrum_series("dense", dense)},
            {"Single vs dense V_B lineshape, " + tag, "shift (Hz)", "amplitude", false, false});
  }
  run.csv("figs7_summary", summary);
}

inline void figure_s8(Run& run) {
  FewSpinRun fr;
  fr.threads = run.threads();
  Table t{{"system", "axis", "position_m", "m_s", "peak_hz", "aliased"}, {}};
  std::vector<Series> series;
  struct Case {
    std::string label;
    SpinSystem sys;
  };
  const std::vector<Case> cases = {{"1H", single_proton_system()}, {"1H_13C", proton_carbon_system()}};
  for (const auto& c : cases) {
    for (auto axis : {SweepAxis::Z, SweepAxis::X}) {
      const std::string ax = axis == SweepAxis::Z ? "z" : "x";
      const auto rows = shift_vs_distance(c.sys, axis, 0.5e-9, 20e-9, 40, {-1, 0, 1}, fr);
      for (const auto& r : rows)
        for (double p : r.peaks) t.add({c.label, ax, r.position, std::int64_t{r.m_s}, p, detail::flag(r.aliased)});
      if (c.label == "1H")
        for (auto& s : detail::shift_series(c.label + " " + ax, rows)) series.push_back(std::move(s));
    }
  }
  run.csv("figs8", t);
  run.svg("figs8", series, {"Few-spin peak shift vs distance", "distance (nm)", "peak (Hz)", false, false});
}

inline void figure_s9(Run& run) {
  FewSpinRun fr;
  fr.threads = run.threads();
  Table t{{"axis", "position_m", "m_s", "peak_hz", "aliased"}, {}};
  std::vector<Series> series;
  for (auto axis : {SweepAxis::Z, SweepAxis::X}) {
    const std::string ax = axis == SweepAxis::Z ? "z" : "x";
    const auto rows = multi_defect_shift(single_proton_system(), four_defect_cluster(), axis, 0.5e-9, 20e-9, 40,
                                         {-1, 0, 1}, fr);
    for (const auto& r : rows)
      for (double p : r.peaks) t.add({ax, r.position, std::int64_t{r.m_s}, p, detail::flag(r.aliased)});
    for (auto& s : detail::shift_series("cluster " + ax, rows)) series.push_back(std::move(s));
  }
  run.csv("figs9", t);
  run.svg("figs9", series, {"Four-defect cluster shift vs distance", "distance (nm)", "peak (Hz)", false, false});
}

inline void run_figure(Run& run, const std::string& id) {
  run.set_figure(id);
  if (id == "3a") figure_3a(run);
  else if (id == "3b") figure_snr(run, "fig3b", samples::proton_half_space(), "SNR, proton half-space");
  else if (id == "3c") figure_snr(run, "fig3c", samples::proton_monolayer(), "SNR, 1 nm proton layer");
  else if (id == "5") figure_5(run);
  else if (id == "6") figure_6(run);
  else if (id == "7") figure_7(run);
  else if (id == "s4") figure_s4(run);
  else if (id == "s5") figure_s5(run);
  else if (id == "s6") figure_s6(run);
  else if (id == "s7") figure_s7(run);
  else if (id == "s8") figure_s8(run);
  else if (id == "s9") figure_s9(run);
  else throw ValidationError("unknown figure id: " + id);
}

// ---- dispatch ----

inline void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "Configuration file (key = value)");
  sub->add_option("--system", opt.system, "Preset used when no --config is given")
      ->check(CLI::IsMember(std::vector<std::string>(preset_names.begin(), preset_names.end())));
  sub->add_option("--out", opt.out_dir, "Output directory");
  sub->add_option("--threads", opt.threads, "Worker threads (0 = available parallelism)");
  sub->add_option("--seed", opt.seed, "Seed for jittered lattices");
  sub->add_flag("--svg", opt.svg, "Also write SVG plots");
  sub->add_flag("--full", opt.full, "Paper-scale back-action sampling (2.8e7 sites)");
}

/// Runs the command line; returns 0 on success, 1 on runtime errors, 2 on usage errors.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Defect-based NMR sensitivity and lineshape toolkit", "dnmr"};
  app.set_version_flag("--version", tool_version);
  Options opt;
  std::string figure_id;
  const std::vector<std::pair<const char*, const char*>> subs = {
      {"sensitivity", "Optimised AC sensitivity over a frequency grid"},
      {"snr", "Single-shot SNR for a sensor and sample"},
      {"geometry", "Geometry factors over the defect-axis angle"},
      {"backaction", "Dipolar back-action lineshape of the sample spins"},
      {"fewspin", "Exact few-spin dynamics: peak shift versus distance"},
      {"lineshape", "Diffusion-limited XY8 contrast dip"},
      {"figure", "Reproduce one figure from its recipe"}};
  for (const auto& [name, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, opt);
    if (std::string(name) == "figure")
      sub->add_option("id", figure_id, "Figure id")->required()->check(CLI::IsMember(figure_ids));
  }
  app.require_subcommand(1);

  std::vector<const char*> argv{"dnmr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  if (args.empty()) {
    out << app.help();
    return 2;
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << tool_version << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    const auto t0 = std::chrono::steady_clock::now();
    Config cfg = opt.config_path ? load_config(*opt.config_path) : preset_config(opt.system);
    Run run(name, std::move(cfg), opt);
    if (name == "sensitivity") run_sensitivity(run);
    else if (name == "snr") run_snr(run, err);
    else if (name == "geometry") run_geometry(run);
    else if (name == "backaction") run_backaction(run);
    else if (name == "fewspin") run_fewspin(run);
    else if (name == "lineshape") run_lineshape(run);
    else run_figure(run, figure_id);
    run.write_manifest(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace dnmr::cli

#endif
