#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wavefield/wave.hpp"

namespace wavefield {

// Holographic reduced representation algebra over complex patterns.

// Circular convolution a ⊛ b, computed in the frequency domain.
WavePattern bind(const WavePattern& a, const WavePattern& b);

// Approximate inverse for correlation: a*[i] = conj(a[(−i) mod n]).
// Its spectrum is the conjugate of a's, so bind(a, involution(a)) has
// spectrum |A(k)|² and equals the delta whenever |A(k)| = 1 everywhere.
WavePattern involution(const WavePattern& a);

// bind(trace, involution(cue)).
WavePattern unbind(const WavePattern& trace, const WavePattern& cue);

// Unit-amplitude impulse at index 0; the identity of bind.
WavePattern delta_pattern(std::size_t dim);

inline constexpr double kDefaultNoiseFloor = 0.25;

// Clean-up codebook. Patterns are normalized on insert.
class ItemMemory {
 public:
  struct Entry {
    std::string label;
    WavePattern pattern;
  };

  ItemMemory() = default;
  explicit ItemMemory(std::size_t dim) : dim_(dim) {}

  // Throws DuplicateLabel, DimMismatch, ZeroEnergy.
  void add(std::string label, const WavePattern& pattern);

  bool contains(std::string_view label) const;
  const WavePattern& at(std::string_view label) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LabelMatch {
  std::string label;
  ResonanceScore score;
};

struct CleanupResult {
  std::vector<LabelMatch> matches;  // descending score, then insertion order
  bool below_threshold = false;     // top score < noise floor
};

// Top-k entries of `memory` by resonance_coherence with `noisy`.
CleanupResult cleanup(const WavePattern& noisy, const ItemMemory& memory, std::size_t k,
                      double noise_floor = kDefaultNoiseFloor);

}  // namespace wavefield
