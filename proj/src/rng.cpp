#include "wsd/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wsd::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t seed, std::string_view key) {
  return splitmix64(seed ^ splitmix64(fnv1a64(key)));
}

Engine instance_stream(std::uint64_t seed, std::string_view instance_id) {
  return Engine(mix(seed, instance_id));
}

std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
  // rejection keeps the draw unbiased
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
  const std::uint64_t limit = max - rem;
  std::uint64_t r;
  do {
    r = eng();
  } while (r > limit);
  return r % n;
}

double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double truncated_normal(Engine& eng, double sigma) {
  for (;;) {
    double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = uniform01(eng);
    double z = std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    if (std::abs(z) <= 2.0) return sigma * z;
  }
}

}  // namespace wsd::rng
