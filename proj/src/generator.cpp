#include "wavefield/generator.hpp"

#include <algorithm>
#include <istream>

#include <json.hpp>

#include "wavefield/error.hpp"

namespace wavefield {

using json = nlohmann::json;

std::vector<Fact> read_facts_jsonl(std::istream& in) {
  std::vector<Fact> facts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "facts line " + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedInput, where + ": " + e.what());
    }
    Fact f;
    for (auto [field, out] : {std::pair{"s", &f.subject}, {"r", &f.relation}, {"o", &f.object}}) {
      if (!doc.is_object() || !doc.contains(field) || !doc[field].is_string() ||
          doc[field].get<std::string>().empty()) {
        throw Error(ErrorCode::MalformedInput, where + ": missing string field '" + field + "'");
      }
      *out = doc[field].get<std::string>();
    }
    facts.push_back(std::move(f));
  }
  return facts;
}

std::string_view to_string(KbEncoding encoding) noexcept {
  return encoding == KbEncoding::slot_store ? "slot_store" : "super_trace";
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::below_threshold: return "below_threshold";
    case StopReason::repeated_label: return "repeated_label";
    case StopReason::exhausted: return "exhausted";
    case StopReason::max_steps: return "max_steps";
  }
  return "unknown";
}

namespace {

std::string relation_text(std::string_view relation) {
  std::string text(relation);
  std::replace(text.begin(), text.end(), '-', ' ');
  return text;
}

}  // namespace

FactKB::FactKB(Mapper mapper, std::vector<Fact> facts, KbEncoding encoding)
    : mapper_(std::move(mapper)), facts_(std::move(facts)), encoding_(encoding), answers_(mapper_.dim()) {
  std::set<Fact> seen;
  for (const auto& f : facts_) {
    if (!seen.insert(f).second) {
      throw Error(ErrorCode::DuplicateLabel, "duplicate fact (" + f.subject + ", " + f.relation + ", " + f.object + ")");
    }
    for (const auto& u : mapper_.parse(relation_text(f.relation))) relation_roots_.insert(u.root);
  }

  const std::uint64_t seed = mapper_.seed();
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    const Fact& f = facts_[i];
    const WavePattern rel = phrase(relation_text(f.relation));
    const WavePattern subj = phrase(f.subject);
    const WavePattern obj = phrase(f.object);
    const std::vector<RoleUnit> forward = {{Role::subject, subj}, {Role::predicate, rel}};
    const std::vector<RoleUnit> inverse = {{Role::subject, obj}, {Role::predicate, rel}};
    entries_.push_back({i, multiplex(forward, seed), f.object});
    entries_.push_back({i, multiplex(inverse, seed), f.subject});
    if (!answers_.contains(f.object)) answers_.add(f.object, obj);
    if (!answers_.contains(f.subject)) answers_.add(f.subject, subj);
  }

  if (encoding_ == KbEncoding::slot_store) {
    store_.emplace(SlotStore::in_memory({.dim = mapper_.dim(), .seed = seed}));
    for (std::size_t e = 0; e < entries_.size(); ++e) store_->put(e, entries_[e].key);
    store_->flush();
  } else {
    trace_.emplace(mapper_.dim());
    for (const auto& a : answers_.entries()) trace_->register_value(a.label, a.pattern);
    for (const auto& e : entries_) trace_->link_assoc(e.key, e.answer);
  }
}

WavePattern FactKB::phrase(std::string_view text) const {
  const auto units = mapper_.parse(text);
  if (units.size() == 1) return normalize(mapper_.encode(units.front()));
  std::vector<std::complex<double>> sum(mapper_.dim());
  for (const auto& u : units) {
    const auto c = mapper_.encode(u).to_complex();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += c[i];
  }
  return normalize(WavePattern::from_complex(sum));
}

WavePattern FactKB::encode_query(std::string_view text) const {
  std::vector<RoleUnit> units;
  for (const auto& u : mapper_.parse(text)) {
    const Role role = relation_roots_.contains(u.root) ? Role::predicate : Role::subject;
    units.push_back({role, mapper_.encode(u)});
  }
  return multiplex(units, mapper_.seed());
}

WavePattern FactKB::emitted_pattern(std::string_view label) const {
  return normalize(bind_role(phrase(label), Role::subject, mapper_.seed()));
}

ReadResult memory_read(const FactKB& kb, const WavePattern& probe,
                       const std::set<std::size_t>& consumed, double noise_floor) {
  if (kb.empty()) throw Error(ErrorCode::EmptyStore, "fact base is empty");
  const auto& entries = kb.entries();
  const std::size_t excluded = static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [&](const FactKB::Entry& e) { return consumed.contains(e.fact); }));
  ReadResult out;
  if (excluded == entries.size()) return out;

  if (kb.encoding() == KbEncoding::slot_store) {
    const auto hits = kb.store().query_topk(probe, excluded + 1, {.kernel = Kernel::coherence});
    for (const auto& h : hits) {
      const auto& e = entries[h.id];
      if (consumed.contains(e.fact)) continue;
      out.label = e.answer;
      out.score = h.score;
      out.fact = e.fact;
      break;
    }
  } else {
    SuperTrace working = kb.trace();
    for (const auto& e : entries) {
      if (consumed.contains(e.fact)) working.remove_assoc(e.key, kb.object_memory().at(e.answer));
    }
    const auto got = working.recall_assoc(probe, 1, noise_floor);
    out.label = got.matches.front().label;
    out.score = got.matches.front().score;
    // Attribute the answer to the live entry whose key best matches the probe.
    double best = -2.0;
    for (const auto& e : entries) {
      if (consumed.contains(e.fact) || e.answer != out.label) continue;
      const double s = resonance_coherence(probe, e.key).value;
      if (s > best) {
        best = s;
        out.fact = e.fact;
      }
    }
  }
  out.below_threshold = out.score.value < noise_floor;
  return out;
}

GenState init_state(const FactKB& kb, std::string_view query) {
  GenState state;
  state.query_pattern = kb.encode_query(query);
  return state;
}

WavePattern formulate_probe(const GenState& state, const FactKB& kb, double decay) {
  if (state.emitted.empty()) return normalize(state.query_pattern);
  auto sum = state.query_pattern.to_complex();
  double weight = 1.0;
  for (auto it = state.emitted.rbegin(); it != state.emitted.rend(); ++it) {
    weight *= decay;
    const auto c = kb.emitted_pattern(*it).to_complex();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += weight * c[i];
  }
  return normalize(WavePattern::from_complex(sum));
}

Generation generate(std::string_view query, const FactKB& kb, const GenerateOptions& options) {
  if (options.max_steps == 0) throw Error(ErrorCode::InvalidArgument, "max_steps must be >= 1");
  if (kb.empty()) throw Error(ErrorCode::EmptyStore, "fact base is empty");
  GenState state = init_state(kb, query);
  Generation gen;
  gen.stop = StopReason::max_steps;
  while (state.steps < options.max_steps) {
    const WavePattern probe = formulate_probe(state, kb, options.decay);
    const ReadResult read = memory_read(kb, probe, state.consumed, options.noise_floor);
    ++state.steps;
    state.probe_history.push_back({state.steps, read.label, read.score.value, read.below_threshold});
    if (read.label.empty()) {
      gen.stop = StopReason::exhausted;
      break;
    }
    if (read.below_threshold) {
      gen.stop = StopReason::below_threshold;
      break;
    }
    if (std::find(state.emitted.begin(), state.emitted.end(), read.label) != state.emitted.end()) {
      gen.stop = StopReason::repeated_label;
      break;
    }
    state.emitted.push_back(read.label);
    if (read.fact) state.consumed.insert(*read.fact);
  }
  gen.tokens = std::move(state.emitted);
  gen.probe_history = std::move(state.probe_history);
  return gen;
}

}  // namespace wavefield
