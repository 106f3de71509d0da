#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace wsd::rng {

// std::mt19937_64 output is pinned by the standard, so every draw below is
// byte-reproducible across platforms as long as the distributions are our
// own (the std::*_distribution classes are implementation-defined).
using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// Combines a run seed with a string key into one engine seed.
std::uint64_t mix(std::uint64_t seed, std::string_view key);

// Stream for one corpus instance: independent of corpus ordering.
Engine instance_stream(std::uint64_t seed, std::string_view instance_id);

// Unbiased draw in [0, n); n must be > 0.
std::uint64_t uniform_below(Engine& eng, std::uint64_t n);

// Uniform double in [0, 1).
double uniform01(Engine& eng);

// Normal(0, sigma) truncated to two standard deviations (redraw outside).
double truncated_normal(Engine& eng, double sigma);

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace wsd::rng
