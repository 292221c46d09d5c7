#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavefield/hrr.hpp"
#include "wavefield/wave.hpp"

namespace wavefield {

// One superposed pattern holding Σ bind(keyᵢ, valueᵢ), plus the value
// codebook used to clean up what unbinding returns.
class SuperTrace {
 public:
  explicit SuperTrace(std::size_t dim);

  // trace ⊕= bind(key, value); registers `value` under `label`.
  // Throws DimMismatch, DuplicateLabel.
  void store_assoc(const WavePattern& key, const WavePattern& value, std::string label);
  // Adds a value to the cleanup codebook without binding it.
  void register_value(std::string label, const WavePattern& value);
  // Binds `key` to a value already registered under `label`, so one value
  // can answer several keys.
  void link_assoc(const WavePattern& key, const std::string& label);
  // trace ⊖= bind(key, value). The label stays in the value memory.
  void remove_assoc(const WavePattern& key, const WavePattern& value);

  // cleanup(unbind(trace, key), value_memory, k). Throws EmptyMemory when
  // nothing has been stored.
  CleanupResult recall_assoc(const WavePattern& key, std::size_t k,
                             double noise_floor = kDefaultNoiseFloor) const;

  WavePattern trace() const;
  const ItemMemory& value_memory() const noexcept { return values_; }
  std::size_t pair_count() const noexcept { return pairs_; }
  std::size_t dim() const noexcept { return sum_.size(); }

  nlohmann::json to_json() const;
  static SuperTrace from_json(const nlohmann::json& doc);

 private:
  void accumulate(const WavePattern& bound, double sign);

  std::vector<std::complex<double>> sum_;
  ItemMemory values_;
  std::size_t pairs_ = 0;
};

struct CapacityRow {
  std::size_t n_items = 0;
  double recall_accuracy = 0.0;
  double mean_top_score = 0.0;
};

struct CapacityConfig {
  std::size_t dim = 1024;
  std::vector<std::size_t> item_counts;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  // Value memory size per trial: max(n, candidates) random values.
  std::size_t candidates = 100;
};

// For each n: fresh traces of n random pairs, one random target recalled
// per trial, rank-1 accuracy reported. Rows are ordered by n.
std::vector<CapacityRow> capacity_probe(const CapacityConfig& config);

}  // namespace wavefield
