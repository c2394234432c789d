#ifndef DNMR_CONSTANTS_HPP
#define DNMR_CONSTANTS_HPP

#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dnmr/error.hpp"

namespace dnmr {

/// SI physical constants (CODATA 2018).
namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// mu_0 / (4 pi) in T m / A.
inline constexpr double mu0_over_4pi = 1.00000000055e-7;
/// Reduced Planck constant, J s.
inline constexpr double hbar = 1.054571817e-34;
/// Bohr magneton, J / T.
inline constexpr double bohr_magneton = 9.2740100783e-24;

/// Electron gyromagnetic ratio magnitude (rad s^-1 T^-1) for a given g-factor.
constexpr double gamma_e_from_g(double g_factor) { return g_factor * bohr_magneton / hbar; }

/// Atomic number densities of the two host lattices (atoms / m^3).
inline constexpr double hbn_atomic_density = 1.10e29;
inline constexpr double diamond_atomic_density = 1.76e29;

/// hBN interlayer spacing, m.
inline constexpr double hbn_interlayer_spacing = 0.333e-9;

}  // namespace constants

enum class Species { H1, C13, H2, F19, P31, N14 };

/// Gyromagnetic ratio gamma/2pi in Hz/T.
constexpr double gamma_over_2pi(Species s) {
  switch (s) {
    case Species::H1: return 42.577478518e6;
    case Species::C13: return 10.7084e6;
    case Species::H2: return 6.536e6;
    case Species::F19: return 40.078e6;
    case Species::P31: return 17.235e6;
    case Species::N14: return 3.077e6;
  }
  return 0.0;
}

/// Gyromagnetic ratio in rad s^-1 T^-1.
constexpr double gamma_of(Species s) { return constants::two_pi * gamma_over_2pi(s); }

inline std::string_view species_name(Species s) {
  switch (s) {
    case Species::H1: return "1H";
    case Species::C13: return "13C";
    case Species::H2: return "2H";
    case Species::F19: return "19F";
    case Species::P31: return "31P";
    case Species::N14: return "14N";
  }
  return "?";
}

inline Species parse_species(std::string_view name) {
  for (auto s : {Species::H1, Species::C13, Species::H2, Species::F19, Species::P31, Species::N14}) {
    if (species_name(s) == name) return s;
  }
  throw ValidationError("unknown nuclear species: " + std::string(name));
}

}  // namespace dnmr

#endif
