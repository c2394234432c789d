#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dnmr/fewspin.hpp"

using namespace dnmr;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// 3.25 ppm of the 1H Larmor frequency at 0.1 T.
const double proton_offset_hz = 3.25e-6 * 42.577478518e6 * 0.1;

double tallest_peak(const FidSpectrum& s) {
  REQUIRE_FALSE(s.peaks.empty());
  auto best = s.peaks.front();
  for (const auto& p : s.peaks)
    if (p.magnitude > best.magnitude) best = p;
  return best.frequency;
}

FidRecord tone(double freq, double duration, std::size_t steps) {
  FidRecord f;
  f.duration = duration;
  f.dt = duration / static_cast<double>(steps);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * f.dt;
    f.samples.emplace_back(std::cos(constants::two_pi * freq * t), std::sin(constants::two_pi * freq * t));
  }
  return f;
}

SpinSystem lone_proton(Vec3 position, std::vector<Vec3> defects) {
  SpinSystem s;
  s.defects = std::move(defects);
  s.nuclei = {Nucleus{Species::H1, position, proton_shift_ppm}};
  return s;
}

}  // namespace

TEST_CASE("propagator is unitary", "[fewspin]") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int dim : {2, 4, 8, 32}) {
    CMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
    const CMatrix h = 1e4 * (a + a.adjoint());
    const CMatrix u = propagator(h, 1.3e-3);
    CHECK((u * u.adjoint() - CMatrix::Identity(dim, dim)).norm() < 1e-12);
  }
}

TEST_CASE("m_s = 0 manifold is diagonal without scalar couplings", "[fewspin]") {
  SpinSystem s;
  s.defects = {Vec3{0.0, 0.0, -2.5e-9}};
  s.nuclei = {Nucleus{Species::H1, {0.3e-9, 0.2e-9, 0.5e-9}, 3.25}, Nucleus{Species::H1, {-0.4e-9, 0.0, 0.4e-9}, 1.2},
              Nucleus{Species::C13, {0.0, 0.5e-9, 0.1e-9}, 2.25}};
  const CMatrix h = build_manifold_hamiltonian(s, 0);
  CMatrix off = h;
  off.diagonal().setZero();
  CHECK(off.norm() == 0.0);
  const CMatrix h1 = build_manifold_hamiltonian(s, 1);
  CMatrix off1 = h1;
  off1.diagonal().setZero();
  CHECK(off1.norm() > 0.0);
}

TEST_CASE("on-axis point-dipole hyperfine at 3.5 nm", "[fewspin]") {
  const double ge = 2.001 * 9.2740100783e-24 / 1.054571817e-34;
  const double gn = 2.0 * constants::pi * 42.577478518e6;
  const double hand = 1e-7 * ge * gn * 1.054571817e-34 * (1.0 - 3.0) / std::pow(3.5e-9, 3);
  const auto a = point_dipole_hyperfine({0, 0, -2.5e-9}, {0, 0, 1e-9}, ge, gamma_of(Species::H1));
  CHECK_THAT(a.a_zz, WithinRel(hand, 1e-9));
  CHECK_THAT(a.a_zz / constants::two_pi, WithinAbs(-3.69e3, 0.01e3));
  CHECK(a.a_zx == 0.0);
  CHECK(a.a_zy == 0.0);
}

TEST_CASE("a proton beyond the cutoff shows only its chemical shift", "[fewspin]") {
  const auto sys = lone_proton({0.0, 0.0, 1e-6}, {Vec3{0.0, 0.0, 0.0}});
  for (int ms : {-1, 0, 1}) {
    const auto lines = transition_lines(sys, ms);
    REQUIRE(lines.size() == 1);
    CHECK_THAT(lines[0].frequency, WithinRel(proton_offset_hz, 1e-6));
    CHECK_THAT(lines[0].frequency, WithinAbs(13.84, 0.01));
    const auto spec = spectrum_of(simulate_fid(sys, ms, 0.2, 5000));
    CHECK_THAT(tallest_peak(spec), WithinAbs(proton_offset_hz, 0.5));
  }
}

TEST_CASE("a zero Hamiltonian gives a constant FID", "[fewspin]") {
  SpinSystem s = lone_proton({0.0, 0.0, 0.0}, {});
  s.nuclei[0].shift_ppm = 0.0;
  s.bias_field = 0.0;
  const auto fid = simulate_fid(s, 1, 0.1, 64);
  for (const auto& x : fid.samples) {
    CHECK_THAT(x.real(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(x.imag(), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("a 1 kHz tone peaks at 1 kHz", "[fewspin]") {
  for (auto w : {Window::None, Window::Hann}) {
    const auto spec = spectrum_of(tone(1000.0, 0.2, 5000), w);
    CHECK_THAT(tallest_peak(spec), WithinAbs(1000.0, 1e-6));
    // Off-grid tones land within half a bin; a rectangular window biases the parabola most.
    const auto offgrid = spectrum_of(tone(1002.0, 0.2, 5000), w);
    CHECK_THAT(tallest_peak(offgrid), WithinAbs(1002.0, w == Window::Hann ? 1.0 : 2.5));
  }
}

TEST_CASE("unwindowed spectrum conserves energy", "[fewspin]") {
  auto f = tone(733.0, 0.05, 1000);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (auto& x : f.samples) x += cplx(0.3 * g(rng), 0.3 * g(rng));
  const auto spec = spectrum_of(f, Window::None);
  double time = 0.0, freq = 0.0;
  for (const auto& x : f.samples) time += std::norm(x);
  for (const auto& x : spec.bins) freq += std::norm(x);
  CHECK_THAT(freq, WithinRel(f.dt * time, 1e-12));
}

TEST_CASE("frequency resolution is the inverse acquisition time", "[fewspin]") {
  const auto spec = spectrum_of(tone(0.0, 0.2, 5000));
  CHECK_THAT(spec.resolution, WithinRel(5.0, 1e-12));
  CHECK_THAT(spec.freq[1] - spec.freq[0], WithinRel(5.0, 1e-12));
  CHECK_THROWS_AS(spectrum_of(FidRecord{0.1, 0.2, {cplx{}, cplx{}}, {}, false}), ValidationError);
}

TEST_CASE("the m_s = 0 curve is flat at the chemical shift", "[fewspin]") {
  const auto rows = shift_vs_distance(single_proton_system(), SweepAxis::Z, 0.5e-9, 20e-9, 12, {0});
  for (const auto& r : rows) {
    REQUIRE(r.peaks.size() == 1);
    CHECK_THAT(r.peaks[0], WithinAbs(proton_offset_hz, 0.5));
  }
}

TEST_CASE("m_s = +1 and -1 mirror about the chemical shift far from the defect", "[fewspin]") {
  for (double z : {8e-9, 12e-9, 20e-9}) {
    const auto sys = lone_proton({0.0, 0.0, z}, single_proton_system().defects);
    const double up = transition_lines(sys, 1)[0].frequency - proton_offset_hz;
    const double down = transition_lines(sys, -1)[0].frequency - proton_offset_hz;
    CHECK_THAT(up, WithinAbs(-down, 1e-6));
  }
  const auto rows = shift_vs_distance(single_proton_system(), SweepAxis::Z, 8e-9, 20e-9, 5, {-1, 1});
  for (std::size_t i = 0; i < rows.size(); i += 2)
    CHECK_THAT(rows[i].peaks[0] - proton_offset_hz, WithinAbs(proton_offset_hz - rows[i + 1].peaks[0], 1.0));
}

TEST_CASE("proton-carbon J coupling splits the proton into a 200 Hz doublet", "[fewspin]") {
  auto sys = proton_carbon_system(200.0);
  sys.defects.clear();
  // Strong-coupling mixing leaves faint carbon lines of order J / dnu; keep the proton doublet.
  std::vector<TransitionLine> lines;
  for (const auto& l : transition_lines(sys, 0))
    if (std::abs(l.amplitude) > 1e-3) lines.push_back(l);
  REQUIRE(lines.size() == 2);
  CHECK_THAT(lines[1].frequency - lines[0].frequency, WithinAbs(200.0, 1e-3));
  // The doublet centre carries the second-order shift J^2 / (4 dnu) away from the carbon.
  const double dnu = 0.5 * (lines[0].frequency + lines[1].frequency) - transition_lines(sys, 0)[0].frequency;
  CHECK_THAT(0.5 * (lines[0].frequency + lines[1].frequency),
             WithinAbs(proton_offset_hz + 200.0 * 200.0 / (4.0 * dnu), 2e-4));
  const auto spec = spectrum_of(simulate_fid(sys, 0, 0.2, 5000));
  REQUIRE(spec.peaks.size() == 2);
  CHECK_THAT(spec.peaks[1].frequency - spec.peaks[0].frequency, WithinAbs(200.0, 1.0));
}

TEST_CASE("weak-coupling J keeps the doublet", "[fewspin]") {
  auto sys = proton_carbon_system(200.0);
  sys.defects.clear();
  sys.weak_coupling = true;
  const auto lines = transition_lines(sys, 0);
  REQUIRE(lines.size() == 2);
  CHECK_THAT(lines[1].frequency - lines[0].frequency, WithinAbs(200.0, 1e-9));
}

TEST_CASE("secular couplings of several defects add", "[fewspin]") {
  const auto cluster = four_defect_cluster();
  SpinSystem sys = lone_proton({0.2e-9, -0.1e-9, 0.0}, {});
  sys.pseudo_secular = false;
  const double ge = constants::gamma_e_from_g(sys.g_factor);
  double expected = proton_offset_hz;
  for (const auto& c : cluster) {
    const Vec3 d = c + Vec3{0.0, 0.0, -3e-9};
    sys.defects.push_back(d);
    expected += point_dipole_hyperfine(d, sys.nuclei[0].position, ge, gamma_of(Species::H1)).a_zz / constants::two_pi;
  }
  const auto lines = transition_lines(sys, 1);
  REQUIRE(lines.size() == 1);
  CHECK_THAT(lines[0].frequency, WithinRel(expected, 1e-9));
}

TEST_CASE("a cluster beyond the cutoff leaves the line unperturbed", "[fewspin]") {
  const auto rows = multi_defect_shift(single_proton_system(), four_defect_cluster(), SweepAxis::Z, 30e-9, 40e-9, 3,
                                       {-1, 0, 1});
  for (const auto& r : rows) {
    REQUIRE(r.peaks.size() == 1);
    CHECK_THAT(r.peaks[0], WithinAbs(proton_offset_hz, 0.5));
  }
}

TEST_CASE("lines beyond the Nyquist frequency are flagged", "[fewspin]") {
  const auto close = lone_proton({0.0, 0.0, 0.0}, {Vec3{0.0, 0.0, -1e-9}});
  CHECK(simulate_fid(close, 1, 0.2, 5000).aliased);
  CHECK_FALSE(simulate_fid(close, 0, 0.2, 5000).aliased);
  const auto far = lone_proton({0.0, 0.0, 0.0}, {Vec3{0.0, 0.0, -8e-9}});
  CHECK_FALSE(simulate_fid(far, 1, 0.2, 5000).aliased);
}

TEST_CASE("distance sweeps are identical across worker counts", "[fewspin]") {
  FewSpinRun one, many;
  many.threads = 3;
  const auto a = shift_vs_distance(proton_carbon_system(), SweepAxis::X, 0.5e-9, 5e-9, 6, {-1, 0, 1}, one);
  const auto b = shift_vs_distance(proton_carbon_system(), SweepAxis::X, 0.5e-9, 5e-9, 6, {-1, 0, 1}, many);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].peaks == b[i].peaks);
    CHECK(a[i].m_s == b[i].m_s);
  }
}

TEST_CASE("spin systems are validated", "[fewspin]") {
  SpinSystem six;
  for (int i = 0; i < 6; ++i) six.nuclei.push_back({Species::H1, {i * 1e-10, 0.0, 0.0}, 0.0});
  CHECK_THROWS_AS(six.validate(), ValidationError);
  SpinSystem twin = lone_proton({0, 0, 0}, {});
  twin.nuclei.push_back(twin.nuclei[0]);
  CHECK_THROWS_AS(twin.validate(), ValidationError);
  CHECK_THROWS_AS(build_manifold_hamiltonian(single_proton_system(), 2), ValidationError);
  auto missing = single_proton_system();
  missing.detect = Species::C13;
  CHECK_THROWS_AS(missing.validate(), ValidationError);
  auto bad_j = proton_carbon_system();
  bad_j.j_couplings[{1, 0}] = 5.0;
  CHECK_THROWS_AS(bad_j.validate(), ValidationError);
}
