#ifndef DNMR_FEWSPIN_HPP
#define DNMR_FEWSPIN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"
#include "dnmr/parallel.hpp"
#include "dnmr/spectrum.hpp"
#include "dnmr/vec3.hpp"

namespace dnmr {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr std::size_t max_nuclei = 5;

/// Chemical shifts used for the few-spin recipes, ppm.
inline constexpr double proton_shift_ppm = 3.25;
inline constexpr double carbon_shift_ppm = 2.25;
inline constexpr double default_j_coupling_hz = 200.0;

struct Nucleus {
  Species species = Species::H1;
  Vec3 position;
  double shift_ppm = 0.0;

  bool operator==(const Nucleus&) const = default;
};

/// One electronic manifold (frozen m_s) acting on up to five spin-1/2 nuclei.
struct SpinSystem {
  double g_factor = 2.001;
  /// Defect electron positions; each is quantized along +z (the bias-field axis).
  std::vector<Vec3> defects;
  std::vector<Nucleus> nuclei;
  /// Scalar couplings in Hz keyed by (i, j) with i < j.
  std::map<std::pair<std::size_t, std::size_t>, double> j_couplings;
  double bias_field = 0.1;
  /// Keep only Iz Iz of each scalar coupling.
  bool weak_coupling = false;
  /// Include the a_zx Ix + a_zy Iy hyperfine terms.
  bool pseudo_secular = true;
  /// Defect-nucleus pairs farther apart than this are not coupled.
  double coupling_cutoff = 10e-9;
  /// Species whose transverse magnetisation is recorded; defaults to the first nucleus.
  std::optional<Species> detect;

  std::size_t dimension() const { return std::size_t{1} << nuclei.size(); }
  Species detected_species() const { return detect ? *detect : nuclei.front().species; }

  void validate() const {
    require(!nuclei.empty(), "at least one nucleus");
    require(nuclei.size() <= max_nuclei, "at most 5 nuclei");
    for (std::size_t i = 0; i < nuclei.size(); ++i)
      for (std::size_t j = i + 1; j < nuclei.size(); ++j)
        require(!(nuclei[i].position == nuclei[j].position), "nucleus coordinates distinct");
    for (const auto& [key, value] : j_couplings) {
      require(key.first < key.second && key.second < nuclei.size(), "scalar couplings between existing nuclei, i < j");
      require(std::isfinite(value), "scalar coupling finite");
    }
    for (const auto& d : defects)
      for (const auto& n : nuclei) require(!(d == n.position), "nucleus not coincident with a defect");
    require(g_factor > 0.0, "g_factor > 0");
    require(bias_field >= 0.0, "bias field >= 0");
    require(coupling_cutoff > 0.0, "coupling cutoff > 0");
    bool detected = false;
    for (const auto& n : nuclei) detected = detected || n.species == detected_species();
    require(detected, "detected species present among the nuclei");
  }
};

/// Point-dipole hyperfine components (rad/s) of a nucleus at `nucleus` from a defect at
/// `defect` quantized along z: the Sz Iz, Sz Ix and Sz Iy coefficients.
struct Hyperfine {
  double a_zz = 0.0, a_zx = 0.0, a_zy = 0.0;
};

inline Hyperfine point_dipole_hyperfine(const Vec3& defect, const Vec3& nucleus, double gamma_e, double gamma_n) {
  const Vec3 r = nucleus - defect;
  const double dist = r.norm();
  require(dist > 0.0, "nucleus not coincident with a defect");
  const Vec3 u = r * (1.0 / dist);
  const double k = constants::mu0_over_4pi * gamma_e * gamma_n * constants::hbar / (dist * dist * dist);
  return {k * (1.0 - 3.0 * u.z * u.z), -3.0 * k * u.z * u.x, -3.0 * k * u.z * u.y};
}

namespace detail {

/// Single-spin operator `op` (2x2) acting on nucleus `which` of `n`.
inline CMatrix embed(const Eigen::Matrix2cd& op, std::size_t which, std::size_t n) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    const CMatrix factor = (k == which) ? CMatrix(op) : CMatrix(CMatrix::Identity(2, 2));
    CMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * factor;
    out = std::move(next);
  }
  return out;
}

struct SpinOps {
  std::vector<CMatrix> ix, iy, iz;
};

inline SpinOps spin_operators(std::size_t n) {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0.0, 0.5, 0.5, 0.0;
  sy << 0.0, cplx(0.0, -0.5), cplx(0.0, 0.5), 0.0;
  sz << 0.5, 0.0, 0.0, -0.5;
  SpinOps ops;
  for (std::size_t k = 0; k < n; ++k) {
    ops.ix.push_back(embed(sx, k, n));
    ops.iy.push_back(embed(sy, k, n));
    ops.iz.push_back(embed(sz, k, n));
  }
  return ops;
}

/// Bare Larmor angular frequency gamma B of one species, the rotating-frame reference.
inline double reference_frequency(Species s, double bias_field) { return gamma_of(s) * bias_field; }

}  // namespace detail

/// Nuclear Hamiltonian (rad/s) of the manifold with electron projection m_s, in the frame
/// rotating at each species' bare Larmor frequency: chemical-shift offsets, scalar couplings
/// and the summed point-dipole hyperfine terms.
inline CMatrix build_manifold_hamiltonian(const SpinSystem& sys, int m_s) {
  sys.validate();
  require(m_s >= -1 && m_s <= 1, "m_s in {-1, 0, +1}");
  const std::size_t n = sys.nuclei.size();
  const auto ops = detail::spin_operators(n);
  const double gamma_e = constants::gamma_e_from_g(sys.g_factor);
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(sys.dimension()), static_cast<Eigen::Index>(sys.dimension()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nuc = sys.nuclei[i];
    h += detail::reference_frequency(nuc.species, sys.bias_field) * nuc.shift_ppm * 1e-6 * ops.iz[i];
    if (m_s == 0) continue;
    for (const auto& d : sys.defects) {
      if ((nuc.position - d).norm() > sys.coupling_cutoff) continue;
      const auto a = point_dipole_hyperfine(d, nuc.position, gamma_e, gamma_of(nuc.species));
      h += static_cast<double>(m_s) * a.a_zz * ops.iz[i];
      if (sys.pseudo_secular) h += static_cast<double>(m_s) * (a.a_zx * ops.ix[i] + a.a_zy * ops.iy[i]);
    }
  }
  for (const auto& [key, j_hz] : sys.j_couplings) {
    const auto [a, b] = key;
    const double w = constants::two_pi * j_hz;
    h += w * ops.iz[a] * ops.iz[b];
    if (!sys.weak_coupling) h += w * (ops.ix[a] * ops.ix[b] + ops.iy[a] * ops.iy[b]);
  }
  return h;
}

/// Laboratory-frame Hamiltonian used for propagation: the rotating-frame matrix plus each
/// nucleus' bare Zeeman term gamma B Iz. Pseudo-secular hyperfine terms are static in this
/// frame, so their second-order shifts come out exactly.
inline CMatrix laboratory_hamiltonian(const SpinSystem& sys, int m_s) {
  CMatrix h = build_manifold_hamiltonian(sys, m_s);
  const auto ops = detail::spin_operators(sys.nuclei.size());
  for (std::size_t i = 0; i < sys.nuclei.size(); ++i)
    h += detail::reference_frequency(sys.nuclei[i].species, sys.bias_field) * ops.iz[i];
  return h;
}

/// exp(-i H t) via eigendecomposition of the Hermitian H.
inline CMatrix propagator(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Eigen::VectorXcd phases = (es.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// One observable frequency component of the FID in the rotating frame.
struct TransitionLine {
  double frequency = 0.0;  ///< Hz
  cplx amplitude;
};

struct FidRecord {
  double dt = 0.0;
  double duration = 0.0;
  std::vector<cplx> samples;
  std::vector<TransitionLine> lines;
  /// Some significant line lies outside +-1/(2 dt).
  bool aliased = false;

  double nyquist() const { return 0.5 / dt; }
};

/// Rotating-frame transition lines of the detected transverse magnetisation after all
/// nuclei are tipped to +x, normalised so the amplitudes sum to 1 at t = 0.
inline std::vector<TransitionLine> transition_lines(const SpinSystem& sys, int m_s) {
  const CMatrix h = laboratory_hamiltonian(sys, m_s);
  const auto ops = detail::spin_operators(sys.nuclei.size());
  const Eigen::Index dim = h.rows();
  CMatrix rho0 = CMatrix::Zero(dim, dim), observable = CMatrix::Zero(dim, dim);
  const Species det = sys.detected_species();
  for (std::size_t i = 0; i < sys.nuclei.size(); ++i) {
    rho0 += ops.ix[i];
    if (sys.nuclei[i].species == det) observable += ops.ix[i] + cplx(0.0, 1.0) * ops.iy[i];
  }
  const cplx norm = (observable * rho0).trace();
  require(std::abs(norm) > 0.0, "detected magnetisation non-zero");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CMatrix& v = es.eigenvectors();
  const CMatrix r = v.adjoint() * rho0 * v;
  const CMatrix o = v.adjoint() * observable * v;
  const double reference = detail::reference_frequency(det, sys.bias_field);
  std::vector<TransitionLine> lines;
  double largest = 0.0;
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b) largest = std::max(largest, std::abs(o(b, a) * r(a, b)));
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const cplx amp = o(b, a) * r(a, b) / norm;
      if (std::abs(amp) * std::abs(norm) <= 1e-12 * largest) continue;
      const double w = es.eigenvalues()(b) - es.eigenvalues()(a) - reference;
      lines.push_back({w / constants::two_pi, amp});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const TransitionLine& x, const TransitionLine& y) {
    return x.frequency < y.frequency || (x.frequency == y.frequency && std::abs(x.amplitude) < std::abs(y.amplitude));
  });
  return lines;
}

/// Free induction decay of <sum I+> of the detected species, demodulated at its bare Larmor
/// frequency, sampled at t = 0, dt, ..., (steps - 1) dt with dt = duration / steps.
inline FidRecord simulate_fid(const SpinSystem& sys, int m_s, double duration, std::size_t steps) {
  require(steps >= 2, "steps >= 2");
  require(duration > 0.0, "duration > 0");
  sys.validate();
  FidRecord fid;
  fid.duration = duration;
  fid.dt = duration / static_cast<double>(steps);
  fid.lines = transition_lines(sys, m_s);
  double largest = 0.0;
  for (const auto& l : fid.lines) largest = std::max(largest, std::abs(l.amplitude));
  for (const auto& l : fid.lines)
    if (std::abs(l.amplitude) > 1e-3 * largest && std::abs(l.frequency) > fid.nyquist()) fid.aliased = true;
  fid.samples.assign(steps, cplx(0.0, 0.0));
  for (const auto& l : fid.lines) {
    const double w = constants::two_pi * l.frequency;
    for (std::size_t n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * fid.dt;
      fid.samples[n] += l.amplitude * cplx(std::cos(w * t), std::sin(w * t));
    }
  }
  return fid;
}

enum class Window { None, Hann };

struct Peak {
  double frequency = 0.0;
  double magnitude = 0.0;
};

/// Centred discrete spectrum of an FID. With Window::None the bins satisfy
/// sum |X_k|^2 = dt * sum |x_n|^2.
struct FidSpectrum {
  std::vector<double> freq;
  std::vector<cplx> bins;
  std::vector<Peak> peaks;
  double resolution = 0.0;

  /// Magnitude lineshape normalised to unit sum, with FWHM of the tallest line.
  Spectrum normalized() const {
    Spectrum s;
    s.freq = freq;
    s.amplitude.resize(bins.size());
    for (std::size_t k = 0; k < bins.size(); ++k) s.amplitude[k] = std::abs(bins[k]);
    finalize_spectrum(s);
    double num = 0.0;
    for (std::size_t k = 0; k < bins.size(); ++k) num += s.amplitude[k] * freq[k];
    s.mean_shift = num;
    return s;
  }
};

inline constexpr double peak_threshold = 0.05;

/// FFT of the FID (scaled by sqrt(dt / N)), shifted so frequencies run from -Nyquist.
/// Peaks are local maxima above 5% of the largest magnitude, refined by a parabola
/// through the three neighbouring bins.
inline FidSpectrum spectrum_of(const FidRecord& fid, Window window = Window::Hann) {
  const std::size_t n = fid.samples.size();
  require(n >= 2, "FID has at least two samples");
  bool nonzero = false;
  for (const auto& s : fid.samples) nonzero = nonzero || std::abs(s) > 0.0;
  require(nonzero, "FID is not identically zero");

  std::vector<cplx> x(fid.samples);
  if (window == Window::Hann) {
    // Periodic Hann normalised to unit mean power so magnitudes stay comparable.
    const double scale = std::sqrt(8.0 / 3.0);
    for (std::size_t i = 0; i < n; ++i)
      x[i] *= scale * 0.5 * (1.0 - std::cos(constants::two_pi * static_cast<double>(i) / static_cast<double>(n)));
  }
  Eigen::FFT<double> fft;
  std::vector<cplx> raw;
  fft.fwd(raw, x);
  const double scale = std::sqrt(fid.dt / static_cast<double>(n));

  FidSpectrum out;
  out.resolution = 1.0 / (static_cast<double>(n) * fid.dt);
  out.freq.resize(n);
  out.bins.resize(n);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = (k + n - half) % n;
    out.bins[k] = raw[src] * scale;
    out.freq[k] = (static_cast<double>(k) - static_cast<double>(half)) * out.resolution;
  }

  std::vector<double> mag(n);
  for (std::size_t k = 0; k < n; ++k) mag[k] = std::abs(out.bins[k]);
  const double top = *std::max_element(mag.begin(), mag.end());
  for (std::size_t k = 0; k < n; ++k) {
    const double left = mag[(k + n - 1) % n], right = mag[(k + 1) % n];
    if (mag[k] < peak_threshold * top || mag[k] < left || mag[k] <= right) continue;
    const double denom = left - 2.0 * mag[k] + right;
    const double shift = denom != 0.0 ? 0.5 * (left - right) / denom : 0.0;
    out.peaks.push_back({out.freq[k] + shift * out.resolution, mag[k]});
  }
  return out;
}

/// Two-spin template from the few-spin recipes: 1H at the origin and 13C 0.11 nm away along y,
/// coupled by `j_hz`, under one defect 2.5 nm below the origin.
inline SpinSystem proton_carbon_system(double j_hz = default_j_coupling_hz) {
  SpinSystem s;
  s.defects = {Vec3{0.0, 0.0, -2.5e-9}};
  s.nuclei = {Nucleus{Species::H1, {0.0, 0.0, 0.0}, proton_shift_ppm},
              Nucleus{Species::C13, {0.0, 0.11e-9, 0.0}, carbon_shift_ppm}};
  s.j_couplings[{0, 1}] = j_hz;
  return s;
}

/// Single-proton template under one defect 2.5 nm below the origin.
inline SpinSystem single_proton_system() {
  SpinSystem s;
  s.defects = {Vec3{0.0, 0.0, -2.5e-9}};
  s.nuclei = {Nucleus{Species::H1, {0.0, 0.0, 0.0}, proton_shift_ppm}};
  return s;
}

/// The four-defect cluster (positions relative to the first defect).
inline std::vector<Vec3> four_defect_cluster() {
  const double a = 1e-10;
  return {Vec3{0.0, 0.0, 0.0}, Vec3{-16.6 * a, -43.7 * a, 8.4 * a}, Vec3{30.0 * a, 52.8 * a, -13.3 * a},
          Vec3{-4.3 * a, -0.5 * a, 5.8 * a}};
}

enum class SweepAxis { X, Z };

struct FewSpinRun {
  double duration = 0.2;
  std::size_t steps = 5000;
  Window window = Window::Hann;
  unsigned threads = 1;
};

struct ShiftRow {
  double position = 0.0;
  int m_s = 0;
  std::vector<double> peaks;  ///< Hz, ascending
  bool aliased = false;
};

namespace detail {

inline std::vector<double> linear_points(double lo, double hi, std::size_t points) {
  require(points >= 2, "points >= 2");
  require(lo > 0.0 && hi > lo, "0 < range start < range end");
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  out.back() = hi;
  return out;
}

template <typename Place>
std::vector<ShiftRow> sweep_rows(const std::vector<double>& positions, const std::vector<int>& ms_set,
                                 const FewSpinRun& run, Place&& place) {
  require(!ms_set.empty(), "at least one m_s");
  std::vector<ShiftRow> rows(positions.size() * ms_set.size());
  parallel_for(rows.size(), run.threads, [&](std::size_t i) {
    const double pos = positions[i / ms_set.size()];
    const int ms = ms_set[i % ms_set.size()];
    const SpinSystem sys = place(pos);
    const auto fid = simulate_fid(sys, ms, run.duration, run.steps);
    const auto spec = spectrum_of(fid, run.window);
    ShiftRow& row = rows[i];
    row.position = pos;
    row.m_s = ms;
    row.aliased = fid.aliased;
    for (const auto& p : spec.peaks) row.peaks.push_back(p.frequency);
  });
  return rows;
}

}  // namespace detail

/// Peak frequencies as the nuclei of `tmpl` are moved: along z to (0, 0, s), or along x to
/// (s, 0, 2.5 nm), with the template's defects fixed.
inline std::vector<ShiftRow> shift_vs_distance(const SpinSystem& tmpl, SweepAxis axis, double lo, double hi,
                                               std::size_t points, const std::vector<int>& ms_set,
                                               const FewSpinRun& run = {}) {
  tmpl.validate();
  const auto positions = detail::linear_points(lo, hi, points);
  return detail::sweep_rows(positions, ms_set, run, [&](double s) {
    SpinSystem sys = tmpl;
    const Vec3 offset = axis == SweepAxis::Z ? Vec3{0.0, 0.0, s} : Vec3{s, 0.0, 2.5e-9};
    for (auto& n : sys.nuclei) n.position = n.position + offset;
    return sys;
  });
}

/// Peak frequencies as a defect cluster is moved relative to the template's nuclei: to
/// (0, 0, -s) for the z axis or (s, 0, -2.5 nm) for x, keeping the cluster's shape.
inline std::vector<ShiftRow> multi_defect_shift(const SpinSystem& tmpl, const std::vector<Vec3>& cluster,
                                                SweepAxis axis, double lo, double hi, std::size_t points,
                                                const std::vector<int>& ms_set, const FewSpinRun& run = {}) {
  require(!cluster.empty(), "cluster has at least one defect");
  const auto positions = detail::linear_points(lo, hi, points);
  return detail::sweep_rows(positions, ms_set, run, [&](double s) {
    SpinSystem sys = tmpl;
    const Vec3 offset = axis == SweepAxis::Z ? Vec3{0.0, 0.0, -s} : Vec3{s, 0.0, -2.5e-9};
    sys.defects.clear();
    for (const auto& c : cluster) sys.defects.push_back(c + offset);
    return sys;
  });
}

}  // namespace dnmr

#endif
