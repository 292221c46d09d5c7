#include "wavefield/hrr.hpp"

#include <algorithm>
#include <numeric>

#include "wavefield/error.hpp"
#include "wavefield/fft.hpp"

namespace wavefield {

WavePattern bind(const WavePattern& a, const WavePattern& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "bind: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const auto ca = a.to_complex();
  const auto cb = b.to_complex();
  return WavePattern::from_complex(fft::circular_convolve(ca, cb));
}

WavePattern involution(const WavePattern& a) {
  const auto c = a.to_complex();
  const std::size_t n = c.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(c[(n - i) % n]);
  return WavePattern::from_complex(out);
}

WavePattern unbind(const WavePattern& trace, const WavePattern& cue) {
  if (trace.dim() != cue.dim()) {
    throw Error(ErrorCode::DimMismatch,
                "unbind: " + std::to_string(trace.dim()) + " vs " + std::to_string(cue.dim()));
  }
  if (!(energy(cue) > 0.0)) throw Error(ErrorCode::ZeroEnergy, "unbind with zero-energy cue");
  return bind(trace, involution(cue));
}

WavePattern delta_pattern(std::size_t dim) {
  std::vector<double> amp(dim, 0.0);
  if (dim > 0) amp[0] = 1.0;
  return WavePattern(std::move(amp), std::vector<double>(dim, 0.0));
}

void ItemMemory::add(std::string label, const WavePattern& pattern) {
  if (dim_ == 0) dim_ = pattern.dim();
  if (pattern.dim() != dim_) {
    throw Error(ErrorCode::DimMismatch, "item memory dim " + std::to_string(dim_) +
                                            ", pattern dim " + std::to_string(pattern.dim()));
  }
  if (index_.contains(label)) throw Error(ErrorCode::DuplicateLabel, label);
  WavePattern unit = normalize(pattern);
  index_.emplace(label, entries_.size());
  entries_.push_back({std::move(label), std::move(unit)});
}

bool ItemMemory::contains(std::string_view label) const {
  return index_.contains(std::string(label));
}

const WavePattern& ItemMemory::at(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) throw Error(ErrorCode::UnknownLexeme, std::string(label));
  return entries_[it->second].pattern;
}

CleanupResult cleanup(const WavePattern& noisy, const ItemMemory& memory, std::size_t k,
                      double noise_floor) {
  if (memory.empty()) throw Error(ErrorCode::EmptyMemory, "cleanup against empty item memory");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "cleanup k must be >= 1");
  if (noisy.dim() != memory.dim()) {
    throw Error(ErrorCode::DimMismatch, "cleanup probe dim " + std::to_string(noisy.dim()) +
                                            ", memory dim " + std::to_string(memory.dim()));
  }
  const auto& entries = memory.entries();
  std::vector<double> scores(entries.size());
  const bool silent = !(energy(noisy) > 0.0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    // A fully cancelled probe resonates with nothing.
    scores[i] = silent ? 0.0 : resonance_coherence(noisy, entries[i].pattern).value;
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  CleanupResult result;
  const std::size_t take = std::min(k, entries.size());
  result.matches.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = order[r];
    result.matches.push_back({entries[i].label, {scores[i], Kernel::coherence}});
  }
  result.below_threshold = result.matches.front().score.value < noise_floor;
  return result;
}

}  // namespace wavefield
