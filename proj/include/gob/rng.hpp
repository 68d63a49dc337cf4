#pragma once

#include "gob/types.hpp"

#include <cstdint>
#include <random>

namespace gob::rng {

// Stable 64-bit mixer (splitmix64). Used to derive independent, reproducible
// per-(seed, round, purpose) random streams so that every algorithm compared
// on the same seed faces an identical environment.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

enum class Stream : std::uint64_t {
  User = 1,
  Context = 2,
  PayoffNoise = 3,
  GraphNoise = 4,
  GroundTruth = 5,
  Cluster = 6,
  Shuffle = 7,
  Positive = 8,
  Generic = 9,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t t, Stream s) {
  return std::mt19937_64(mix(mix(seed, t), static_cast<std::uint64_t>(s)));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, Stream s) {
  return make_stream(seed, 0, s);
}

// Uniform point on the unit sphere in R^d.
inline Vector unit_vector(std::mt19937_64& gen, Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  double norm2 = 0.0;
  do {
    for (Index i = 0; i < d; ++i) v[i] = normal(gen);
    norm2 = v.squaredNorm();
  } while (norm2 < 1e-24);
  return v / std::sqrt(norm2);
}

// FNV-1a, used for config fingerprints and cache validation.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace gob::rng
