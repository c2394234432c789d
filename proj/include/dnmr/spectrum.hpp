#ifndef DNMR_SPECTRUM_HPP
#define DNMR_SPECTRUM_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "dnmr/error.hpp"

namespace dnmr {

/// Lineshape on a uniform frequency grid. Amplitudes are non-negative and sum to 1.
struct Spectrum {
  std::vector<double> freq;
  std::vector<double> amplitude;
  double fwhm = 0.0;
  double mean_shift = 0.0;
  double peak = 0.0;

  double bin_width() const { return freq.size() > 1 ? freq[1] - freq[0] : 0.0; }
};

struct HalfMaxWidth {
  double left = 0.0;
  double right = 0.0;
  double width() const { return right - left; }
};

/// Full width at half maximum by linear interpolation between bins. With several maximal
/// bins the outermost ones are used, so ties widen the result.
inline HalfMaxWidth half_max_width(const std::vector<double>& freq, const std::vector<double>& amp) {
  require(freq.size() == amp.size() && !amp.empty(), "spectrum grid and amplitudes must match");
  const double top = *std::max_element(amp.begin(), amp.end());
  require(top > 0.0, "spectrum has no positive amplitude");
  std::size_t first = 0, last = 0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    if (amp[i] == top) {
      if (first == 0 && amp[0] != top) first = i;
      last = i;
    }
  }
  if (amp[0] == top) first = 0;
  const double half = 0.5 * top;
  const double df = freq.size() > 1 ? freq[1] - freq[0] : 0.0;

  HalfMaxWidth w;
  std::size_t i = first;
  while (i > 0 && amp[i - 1] >= half) --i;
  if (i == 0) {
    w.left = freq[0] - 0.5 * df;
  } else {
    const double a = amp[i - 1], b = amp[i];
    w.left = freq[i - 1] + (half - a) / (b - a) * df;
  }
  std::size_t j = last;
  while (j + 1 < amp.size() && amp[j + 1] >= half) ++j;
  if (j + 1 == amp.size()) {
    w.right = freq.back() + 0.5 * df;
  } else {
    const double a = amp[j], b = amp[j + 1];
    w.right = freq[j] + (a - half) / (a - b) * df;
  }
  return w;
}

/// Normalises amplitudes to unit sum and fills fwhm and peak. mean_shift is left to the caller.
inline void finalize_spectrum(Spectrum& s) {
  const double total = std::accumulate(s.amplitude.begin(), s.amplitude.end(), 0.0);
  require(total > 0.0, "spectrum weights are all zero");
  for (auto& a : s.amplitude) a /= total;
  const auto top = std::max_element(s.amplitude.begin(), s.amplitude.end());
  s.peak = s.freq[static_cast<std::size_t>(top - s.amplitude.begin())];
  s.fwhm = half_max_width(s.freq, s.amplitude).width();
}

}  // namespace dnmr

#endif
