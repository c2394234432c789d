#ifndef DNMR_VEC3_HPP
#define DNMR_VEC3_HPP

#include <cmath>
#include <cstdint>

namespace dnmr {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const { return *this * (1.0 / norm()); }
  constexpr bool operator==(const Vec3&) const = default;
};

/// Unit vector tilted by alpha from +z towards +x.
inline Vec3 axis_from_alpha(double alpha) { return {std::sin(alpha), 0.0, std::cos(alpha)}; }

/// Stateless 64-bit mix (SplitMix64 finaliser); hash(seed, i) gives reproducible
/// per-index random numbers independent of evaluation order.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in (0, 1) from (seed, index, stream).
constexpr double hashed_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  const std::uint64_t h = mix64(mix64(seed ^ mix64(index)) + stream);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace dnmr

#endif
