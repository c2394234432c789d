#ifndef DNMR_GOLDEN_HPP
#define DNMR_GOLDEN_HPP

#include <cmath>
#include <cstddef>
#include <utility>

namespace dnmr {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  /// The scan minimum sat on an end of the search interval; no interior bracket was found.
  bool at_boundary = false;
  int evaluations = 0;
};

/// Golden-section minimisation of a unimodal function on [lo, hi] until the bracket is
/// narrower than abs_tol.
template <typename F>
ScalarMinimum golden_section(F&& f, double lo, double hi, double abs_tol, int max_iter = 200) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  int evals = 2;
  for (int it = 0; it < max_iter && (b - a) > abs_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  ScalarMinimum out;
  if (fc <= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  out.evaluations = evals;
  return out;
}

/// Coarse uniform scan of [lo, hi] with `scan_points` samples, then golden-section inside
/// the two cells around the best sample. Falls back to the boundary sample when the scan
/// minimum is an endpoint.
template <typename F>
ScalarMinimum bracketed_minimum(F&& f, double lo, double hi, std::size_t scan_points, double abs_tol) {
  std::size_t best = 0;
  double best_value = f(lo);
  const double step = (hi - lo) / static_cast<double>(scan_points - 1);
  for (std::size_t i = 1; i < scan_points; ++i) {
    const double x = (i + 1 == scan_points) ? hi : lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0 || best + 1 == scan_points) {
    ScalarMinimum edge;
    edge.x = best == 0 ? lo : hi;
    edge.value = best_value;
    edge.at_boundary = true;
    edge.evaluations = static_cast<int>(scan_points);
    return edge;
  }
  const double a = lo + step * static_cast<double>(best - 1);
  const double b = lo + step * static_cast<double>(best + 1);
  auto inner = golden_section(f, a, b, abs_tol);
  inner.evaluations += static_cast<int>(scan_points);
  if (best_value < inner.value) {
    inner.x = lo + step * static_cast<double>(best);
    inner.value = best_value;
  }
  return inner;
}

}  // namespace dnmr

#endif
