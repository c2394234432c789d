#ifndef DNMR_GEOMETRY_HPP
#define DNMR_GEOMETRY_HPP

#include <cmath>

#include "dnmr/constants.hpp"
#include "dnmr/error.hpp"

namespace dnmr {

/// Defect axis angle from the surface normal and the finite-sample correction ratio.
struct GeometryInput {
  double alpha = 0.0;
  double epsilon = 0.0;

  void validate() const {
    require(alpha >= 0.0 && alpha <= constants::pi, "0 <= alpha <= pi");
    require(epsilon >= 0.0 && epsilon <= 1.0, "0 <= epsilon <= 1");
  }
};

/// Uniformly polarised sample, signal magnetisation transverse to the bias field.
inline double g_transverse(double alpha, double epsilon = 0.0) {
  GeometryInput{alpha, epsilon}.validate();
  const double e = epsilon;
  return constants::pi * std::sin(2.0 * alpha) * (1.0 + 0.5 * e * e * e - 1.5 * e);
}

/// Uniformly polarised sample, signal magnetisation along the bias field.
inline double g_longitudinal(double alpha) {
  GeometryInput{alpha, 0.0}.validate();
  return constants::pi * (std::cos(2.0 * alpha) + 1.0 / 3.0);
}

/// Statistically polarised sample; always in [5, 8].
inline double g_statistical(double alpha) {
  GeometryInput{alpha, 0.0}.validate();
  const double s2 = std::sin(alpha) * std::sin(alpha);
  return 8.0 - 3.0 * s2 * s2;
}

}  // namespace dnmr

#endif
