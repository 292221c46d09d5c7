#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace wavefield {

class WavePattern;

// Portable, bit-reproducible randomness. std::normal_distribution is not
// specified bit-exactly across standard libraries, so every draw here is
// built from splitmix64 plus Box-Muller.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Counter-based draw: the i-th word of the stream keyed by `key`.
constexpr std::uint64_t counter_word(std::uint64_t key, std::uint64_t i) noexcept {
  return splitmix64(splitmix64(key) ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
}

// Maps 64 random bits to (0, 1]; never returns 0 so log() is safe.
constexpr double unit_open_left(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : key_(seed) {}

  std::uint64_t next_u64() noexcept { return counter_word(key_, counter_++); }
  double uniform() noexcept { return unit_open_left(next_u64()); }
  double normal() noexcept;
  std::uint64_t below(std::uint64_t bound) noexcept;  // uniform in [0, bound)

  // Derives an independent stream, e.g. one per Monte-Carlo trial.
  Rng fork(std::uint64_t tag) const noexcept {
    return Rng(splitmix64(key_ ^ splitmix64(tag + 0xD1B54A32D192ED03ULL)));
  }

  // Unit-norm real Gaussian vector.
  std::vector<double> unit_vector(std::size_t dim);
  // Circularly-symmetric complex Gaussian pattern, normalized to unit energy.
  WavePattern pattern(std::size_t dim);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wavefield
