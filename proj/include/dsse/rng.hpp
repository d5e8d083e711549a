#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace dsse {

using Rng = std::mt19937_64;

/// Stream purposes; part of every stream key so that streams for different
/// purposes never coincide.
enum class StreamTag : std::uint64_t { load_scale = 1, measurement_noise = 2, sensor_accuracy = 3 };

/// Independent generator keyed by (seed, tag, key...). The same key always
/// yields the same stream regardless of which thread asks for it.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  push(static_cast<std::uint64_t>(tag));
  for (std::uint64_t k : key) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

/// Uniform draw on [lo, hi) built from raw engine bits (53-bit mantissa) so the
/// result does not depend on the standard library's distribution code.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace dsse
