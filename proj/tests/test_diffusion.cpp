#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "dnmr/diffusion.hpp"

using namespace dnmr;
using boost::math::quadrature::gauss_kronrod;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LineshapeConfig frozen(const char* name, double depth, double density) {
  SampleSpec s;
  s.density = density;
  s.bias_field = 0.0197;
  LineshapeConfig c = lineshape_recipe::make(preset(name), depth, s);
  c.sample.density = density;
  return c;
}

}  // namespace

TEST_CASE("correlation time hand evaluations", "[diffusion]") {
  CHECK_THAT(correlation_time(2.5e-9, 5e5 * 1e-18), WithinRel(6.25e-18 / 3e-12, 1e-14));
  CHECK_THAT(correlation_time(2.5e-9, 5e5 * 1e-18), WithinAbs(2.08e-6, 0.005e-6));
  CHECK_THAT(correlation_time(2.5e-9, 0.038e-18), WithinRel(6.25 / (6.0 * 0.038), 1e-12));
  CHECK_THAT(correlation_time(2.5e-9, 0.038e-18), WithinRel(27.4, 0.01));
  CHECK(std::isinf(correlation_time(2.5e-9, 0.0)));
  CHECK_THROWS_AS(correlation_time(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(correlation_time(1e-9, -1.0), ValidationError);
}

TEST_CASE("effective nuclear dephasing combines harmonically", "[diffusion]") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THAT(effective_t2n(inf, 9e-6), WithinRel(9e-6, 1e-15));
  CHECK_THAT(effective_t2n(3e-3, inf), WithinRel(3e-3, 1e-15));
  CHECK_THAT(effective_t2n(4e-6, 4e-6), WithinRel(2e-6, 1e-15));
}

TEST_CASE("no signal means no dip", "[diffusion]") {
  CHECK(phase_variance(1.76e11, 0.0, 838.8e3, 0.0, 5.96e-7, 800) == 0.0);
  auto c = frozen("vb_aggregated", 2.5e-9, 1e27);
  c.sample.density = 1e-300;
  for (const auto& p : contrast_curve(c)) CHECK_THAT(p.contrast, WithinAbs(1.0, 1e-15));
}

TEST_CASE("dip sits at half the Larmor period", "[diffusion]") {
  const auto c = frozen("vb_aggregated", 2.5e-9, 1e23);
  CHECK_THAT(c.larmor(), WithinAbs(838.8e3, 0.1e3));
  const auto m = dip_metrics(contrast_curve(c));
  const double step = c.tau_grid[1] - c.tau_grid[0];
  CHECK(std::abs(m.tau_center - 0.5 / c.larmor()) <= step);
  CHECK(m.depth > 0.0);
}

TEST_CASE("time-domain phase variance matches frequency-domain quadrature", "[diffusion]") {
  // <phi^2> = gamma^2 B^2 int S(nu) |F_k(nu, tau)|^2 dnu over positive frequencies.
  const double ge = 1.76e11, b = 1e-7, fl = 838.8e3;
  for (int k : {8, 32})
    for (double hw : {2e4, 1e5})
      for (double rel : {1.0, 0.93, 1.2}) {
        const double tau = rel * 0.5 / fl;
        // Symmetric spectrum over nu > 0: the line at +f plus the mirror of its negative tail.
        auto f = [&](double nu) {
          return (lorentzian(nu, fl, hw) + lorentzian(-nu, fl, hw)) * filter_function_sq(nu, tau, k);
        };
        // Break at every quarter of the filter's harmonic spacing so each lobe is resolved.
        const double step = 0.25 / tau;
        double integral = 0.0;
        for (int j = 0; j < 400; ++j)
          integral += gauss_kronrod<double, 61>::integrate(f, j * step, (j + 1) * step, 20, 1e-13);
        integral += gauss_kronrod<double, 61>::integrate(f, 400 * step, std::numeric_limits<double>::infinity(), 20, 1e-13);
        const double expected = ge * ge * b * b * integral;
        CHECK_THAT(phase_variance(ge, b, fl, hw, tau, k), WithinRel(expected, 1e-4));
      }
}

TEST_CASE("pure-line phase variance at resonance", "[diffusion]") {
  // On resonance the square-wave modulation of length k tau gives |F|^2 = (2 k tau / pi)^2.
  const double ge = 1.76e11, b = 1e-8, fl = 1e6;
  const int k = 16;
  const double tau = 0.5 / fl;
  const double full = ge * ge * b * b * std::pow(2.0 * k * tau / constants::pi, 2);
  CHECK_THAT(phase_variance(ge, b, fl, 0.0, tau, k), WithinRel(full, 1e-9));
  CHECK_THAT(filter_function_sq(fl, tau, k), WithinRel(std::pow(2.0 * k * tau / constants::pi, 2), 1e-12));
}

TEST_CASE("Lorentzian integrates to one", "[diffusion]") {
  auto f = [](double nu) { return lorentzian(nu, 838.8e3, 3.5e4); };
  const double inf = std::numeric_limits<double>::infinity();
  const double mass = gauss_kronrod<double, 61>::integrate(f, -inf, 838.8e3, 20, 1e-12) +
                      gauss_kronrod<double, 61>::integrate(f, 838.8e3, inf, 20, 1e-12);
  CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
}

TEST_CASE("V_B to NV contrast ratio in the small-signal limit", "[diffusion]") {
  const auto vb = frozen("vb_aggregated", 2.5e-9, 1e21);
  const auto nv = frozen("single_nv", 6e-9, 1e21);
  const auto r = vb_nv_contrast_ratio(vb, nv);
  const double g = preset("vb_aggregated").gamma_e() / preset("single_nv").gamma_e();
  const double hand = (8.0 / std::pow(2.5, 3)) / ((8.0 - 4.0 / 3.0) / std::pow(6.0, 3)) * g * g;
  CHECK_THAT(r.ratio, WithinRel(hand, 1e-3));
  CHECK_THAT(r.ratio, WithinAbs(16.6, 2.0));
  CHECK_FALSE(r.regime_violation);
}

TEST_CASE("identical configurations give a unit ratio", "[diffusion]") {
  const auto vb = frozen("vb_aggregated", 2.5e-9, 1e23);
  CHECK(vb_nv_contrast_ratio(vb, vb).ratio == 1.0);
}

TEST_CASE("contrast ratio is invariant under common density scaling", "[diffusion]") {
  const auto a = vb_nv_contrast_ratio(frozen("vb_aggregated", 2.5e-9, 1e20), frozen("single_nv", 6e-9, 1e20));
  const auto b = vb_nv_contrast_ratio(frozen("vb_aggregated", 2.5e-9, 1e19), frozen("single_nv", 6e-9, 1e19));
  CHECK_THAT(a.ratio, WithinRel(b.ratio, 1e-3));
}

TEST_CASE("saturated dips are flagged", "[diffusion]") {
  const auto r = vb_nv_contrast_ratio(frozen("vb_aggregated", 2.5e-9, 1e27), frozen("single_nv", 6e-9, 1e27));
  CHECK(r.regime_violation);
}

TEST_CASE("contrast lies in (0, 1] and tends to 1 at short tau", "[diffusion]") {
  for (bool decay : {false, true}) {
    auto c = frozen("vb_aggregated", 2.5e-9, 1e27);
    c.sample = samples::immersion_oil();
    c.sensor_decay = decay;
    for (const auto& p : contrast_curve(c)) {
      CHECK(p.contrast > 0.0);
      CHECK(p.contrast <= 1.0);
    }
    c.tau_grid = {1e-12, 2e-12};
    for (const auto& p : contrast_curve(c)) {
      const double decay_only = decay ? sensor_decay_factor(c.defect, c.k, p.tau) : 1.0;
      CHECK_THAT(p.contrast, WithinAbs(decay_only, 1e-6));
    }
  }
}

TEST_CASE("shorter nuclear dephasing broadens and shallows the dip", "[diffusion]") {
  double prev_width = 0.0, prev_depth = 2.0;
  for (double t2 : {1e-3, 1e-4, 3e-5, 1e-5}) {
    auto c = frozen("vb_aggregated", 2.5e-9, 1e24);
    c.sample.t2n_intrinsic = t2;
    c.tau_grid = resonance_tau_grid(c.larmor(), 0.5, 4001);
    const auto m = dip_metrics(contrast_curve(c));
    CHECK(m.fwhm_hz > prev_width);
    CHECK(m.depth < prev_depth);
    prev_width = m.fwhm_hz;
    prev_depth = m.depth;
  }
}

TEST_CASE("sensor decay follows the stretched coherence law", "[diffusion]") {
  const auto p = preset("single_nv");
  const double coherence = std::min(std::pow(800.0, p.s_exponent) * p.t2_echo, p.t2_max);
  CHECK_THAT(sensor_decay_factor(p, 800, 6e-7), WithinRel(std::exp(-std::pow(800 * 6e-7 / coherence, p.p_stretch)), 1e-14));
}

TEST_CASE("contrast curves are identical across worker counts", "[diffusion]") {
  auto c = lineshape_recipe::vb(samples::immersion_oil());
  const auto a = contrast_curve(c, 1);
  const auto b = contrast_curve(c, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].contrast == b[i].contrast);
}

TEST_CASE("lineshape configurations are validated", "[diffusion]") {
  auto c = frozen("vb_aggregated", 2.5e-9, 1e27);
  c.k = 12;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.k = 16;
  c.tau_grid = {2e-7, 1e-7};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK_THROWS_AS(filter_function_sq(1e6, 1e-7, 3), ValidationError);
}
