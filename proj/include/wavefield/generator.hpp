#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wavefield/hrr.hpp"
#include "wavefield/mapper.hpp"
#include "wavefield/slot_store.hpp"
#include "wavefield/super_trace.hpp"

namespace wavefield {

struct Fact {
  std::string subject;
  std::string relation;
  std::string object;

  friend auto operator<=>(const Fact&, const Fact&) = default;
};

// One fact per line: {"s": "...", "r": "...", "o": "..."}. Blank lines are
// skipped. Throws MalformedInput naming the line.
std::vector<Fact> read_facts_jsonl(std::istream& in);

enum class KbEncoding { slot_store, super_trace };

std::string_view to_string(KbEncoding encoding) noexcept;

// Facts as resonant key → answer associations.
//
// Every fact (s, r, o) is indexed in both directions, so a query can name
// either end: key(subject: s, predicate: r) answers o, and
// key(subject: o, predicate: r) answers s. Relation labels are phrases with
// hyphens for spaces ("capital-of").
class FactKB {
 public:
  struct Entry {
    std::size_t fact;
    WavePattern key;
    std::string answer;
  };

  // Throws DuplicateLabel on a repeated triple.
  FactKB(Mapper mapper, std::vector<Fact> facts, KbEncoding encoding = KbEncoding::slot_store);

  // ψ_query with roles tagged against the KB: words that belong to some
  // relation are predicates, everything else is a subject.
  WavePattern encode_query(std::string_view text) const;
  // Unit-energy subject-role pattern of an emitted answer, fed back into
  // the next probe.
  WavePattern emitted_pattern(std::string_view label) const;
  // Phrase pattern: normalized sum of the encoded content words.
  WavePattern phrase(std::string_view text) const;

  const std::vector<Fact>& facts() const noexcept { return facts_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const ItemMemory& object_memory() const noexcept { return answers_; }
  const Mapper& mapper() const noexcept { return mapper_; }
  KbEncoding encoding() const noexcept { return encoding_; }
  bool empty() const noexcept { return facts_.empty(); }

  const SlotStore& store() const { return *store_; }
  const SuperTrace& trace() const { return *trace_; }

 private:
  Mapper mapper_;
  std::vector<Fact> facts_;
  KbEncoding encoding_;
  std::vector<Entry> entries_;
  ItemMemory answers_;
  std::set<std::string> relation_roots_;
  std::optional<SlotStore> store_;
  std::optional<SuperTrace> trace_;
};

struct ReadResult {
  std::string label;  // empty when nothing was left to read
  ResonanceScore score;
  bool below_threshold = true;
  std::optional<std::size_t> fact;  // the fact that resonated
};

// Single resonance read. Facts in `consumed` are excluded.
ReadResult memory_read(const FactKB& kb, const WavePattern& probe,
                       const std::set<std::size_t>& consumed = {},
                       double noise_floor = kDefaultNoiseFloor);

struct ProbeStep {
  std::size_t step;
  std::string label;
  double score;
  bool below_threshold;
};

struct GenState {
  WavePattern query_pattern;
  std::vector<std::string> emitted;
  std::vector<ProbeStep> probe_history;
  std::size_t steps = 0;
  std::set<std::size_t> consumed;
};

GenState init_state(const FactKB& kb, std::string_view query);

inline constexpr double kEmissionDecay = 0.5;

// normalize(ψ_query ⊕ Σⱼ decayʲ · emitted_pattern(emitted[−j])), j from 1 at
// the most recent emission.
WavePattern formulate_probe(const GenState& state, const FactKB& kb,
                            double decay = kEmissionDecay);

enum class StopReason { below_threshold, repeated_label, exhausted, max_steps };

std::string_view to_string(StopReason reason) noexcept;

struct Generation {
  std::vector<std::string> tokens;
  std::vector<ProbeStep> probe_history;
  StopReason stop = StopReason::max_steps;
};

struct GenerateOptions {
  std::size_t max_steps = 8;
  double noise_floor = kDefaultNoiseFloor;
  double decay = kEmissionDecay;
};

// probe → read → emit, until the read falls below the noise floor, returns
// a label already emitted, every fact is consumed, or max_steps is reached.
// Throws EmptyStore for an empty KB, InvalidArgument for max_steps = 0.
Generation generate(std::string_view query, const FactKB& kb, const GenerateOptions& options = {});

}  // namespace wavefield
