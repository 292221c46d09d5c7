#include "wavefield/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "wavefield/error.hpp"
#include "wavefield/mapper.hpp"
#include "wavefield/random.hpp"
#include "wavefield/slot_store.hpp"

namespace wavefield {

using json = nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

json EvalReport::to_json() const {
  json doc{{"suite", suite}, {"config", config}, {"metrics", metrics}, {"failures", failures}};
  if (!table.empty()) doc["table"] = table;
  if (timing) doc["timing"] = *timing;
  if (hardware) doc["hardware"] = *hardware;
  return doc;
}

std::vector<std::string> pseudo_words(std::size_t n, std::uint64_t seed) {
  static constexpr char kConsonants[] = "bcfghjklmprstvz";
  static constexpr char kVowels[] = "aeiou";
  const RuleSet rules = RuleSet::defaults();
  Rng rng = Rng(seed).fork(0x776f726473);  // "words"
  std::set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    std::string w;
    for (int i = 0; i < 3; ++i) {
      w.push_back(kConsonants[rng.below(sizeof(kConsonants) - 1)]);
      w.push_back(kVowels[rng.below(sizeof(kVowels) - 1)]);
    }
    const auto units = parse(w, rules);
    if (units.size() != 1 || units.front().root != w || !units.front().affixes.empty()) continue;
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

EvalReport run_negation_eval(const NegationEvalConfig& config) {
  if (config.n_base_words == 0) throw Error(ErrorCode::InvalidArgument, "n_base_words must be >= 1");
  if (config.dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");

  const Mapper mapper(Lexicon::seeded(config.dim, config.seed), RuleSet::defaults());
  const auto words = pseudo_words(config.n_base_words, config.seed);
  Rng rng = Rng(config.seed).fork(0x6e6567);  // "neg"

  SlotStore store = SlotStore::in_memory({.dim = config.dim, .seed = config.seed});
  std::vector<std::uint64_t> negated_id(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool negated_first = rng.below(2) == 1;
    const std::uint64_t lo = 2 * i;
    negated_id[i] = negated_first ? lo : lo + 1;
    store.put(negated_first ? lo + 1 : lo, mapper.map(words[i]));
    store.put(negated_id[i], mapper.map("not " + words[i]));
  }
  for (std::size_t j = 0; j < config.n_distractors; ++j) {
    store.put(2 * words.size() + j, rng.pattern(config.dim));
  }
  store.flush();

  EvalReport report;
  report.suite = "negation";
  report.config = {{"dim", config.dim},
                   {"n_base_words", config.n_base_words},
                   {"n_distractors", config.n_distractors},
                   {"seed", config.seed},
                   {"kernel", "coherence"},
                   {"baseline", "amplitude_cosine"},
                   {"store_checksum", hex64(store.checksum())}};

  std::size_t resonance_hits = 0;
  std::size_t baseline_hits = 0;
  std::size_t baseline_ties = 0;
  double negated_score = 0.0;
  double base_score = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const WavePattern query = mapper.map("not " + words[i]);
    const auto res = store.query_topk(query, 2, {.kernel = Kernel::coherence, .threads = config.threads});
    const auto base = store.query_topk(query, 2, {.kernel = Kernel::amplitude_cosine, .threads = config.threads});
    if (res.front().id == negated_id[i]) {
      ++resonance_hits;
    } else {
      report.failures.push_back("resonance missed 'not " + words[i] + "'");
    }
    baseline_hits += base.front().id == negated_id[i];
    baseline_ties += base.size() == 2 && base[0].score.value == base[1].score.value;
    const std::uint64_t base_id = negated_id[i] ^ 1u;
    negated_score += resonance_coherence(query, *store.get(negated_id[i])).value;
    base_score += resonance_coherence(query, *store.get(base_id)).value;
  }
  const double n = static_cast<double>(words.size());
  report.metrics = {{"precision_at_1_resonance", static_cast<double>(resonance_hits) / n},
                    {"precision_at_1_amplitude_cosine", static_cast<double>(baseline_hits) / n},
                    {"baseline_top2_tie_rate", static_cast<double>(baseline_ties) / n},
                    {"mean_coherence_negated", negated_score / n},
                    {"mean_coherence_base", base_score / n}};
  return report;
}

std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(colon + 2);
      break;
    }
  }
  return model + " (" + std::to_string(std::thread::hardware_concurrency()) + " hw threads)";
}

EvalReport run_latency_bench(const LatencyBenchConfig& config) {
  if (config.dim == 0 || config.n_patterns == 0 || config.n_queries == 0 || config.k == 0) {
    throw Error(ErrorCode::InvalidArgument, "dim, n, queries and k must be >= 1");
  }
  using clock = std::chrono::steady_clock;
  const StoreOptions opts{.dim = config.dim, .seed = config.seed};
  const auto build_start = clock::now();
  SlotStore store = config.store_dir ? SlotStore::create(*config.store_dir, opts) : SlotStore::in_memory(opts);
  Rng rng(config.seed);
  for (std::size_t i = 0; i < config.n_patterns; ++i) store.put(i, rng.pattern(config.dim));
  store.flush();
  const double build_seconds = std::chrono::duration<double>(clock::now() - build_start).count();

  Rng qrng = Rng(config.seed).fork(0x7175657279);  // "query"
  std::vector<WavePattern> queries;
  queries.reserve(config.n_queries);
  for (std::size_t q = 0; q < config.n_queries; ++q) queries.push_back(qrng.pattern(config.dim));

  std::vector<double> micros;
  micros.reserve(queries.size());
  std::uint64_t digest = 0xCBF29CE484222325ULL;
  double top_sum = 0.0;
  for (const auto& q : queries) {
    const auto t0 = clock::now();
    const auto hits = store.query_topk(q, config.k, {.kernel = std::nullopt, .threads = config.threads});
    micros.push_back(std::chrono::duration<double, std::micro>(clock::now() - t0).count());
    for (const auto& h : hits) digest = splitmix64(digest ^ h.id);
    top_sum += hits.front().score.value;
  }
  double total_micros = 0.0;
  for (double m : micros) total_micros += m;

  EvalReport report;
  report.suite = "latency";
  report.config = {{"dim", config.dim},      {"n_patterns", config.n_patterns},
                   {"n_queries", config.n_queries}, {"seed", config.seed},
                   {"k", config.k},          {"threads", config.threads},
                   {"kernel", "coherence"},  {"storage", config.store_dir ? "disk" : "memory"}};
  report.metrics = {{"comparisons_per_query", static_cast<double>(config.n_patterns)},
                    {"mean_top1_score", top_sum / static_cast<double>(queries.size())}};
  report.config["result_digest"] = hex64(digest);
  report.timing = json{{"mean_query_micros", total_micros / static_cast<double>(micros.size())},
                       {"median_query_micros", percentile(micros, 0.5)},
                       {"p99_query_micros", percentile(micros, 0.99)},
                       {"comparisons_per_sec", static_cast<double>(config.n_patterns) *
                                                   static_cast<double>(micros.size()) /
                                                   (total_micros * 1e-6)},
                       {"build_seconds", build_seconds}};
  report.hardware = hardware_descriptor();
  return report;
}

EvalReport run_capacity_eval(const CapacityConfig& config) {
  const auto rows = capacity_probe(config);
  EvalReport report;
  report.suite = "capacity";
  report.config = {{"dim", config.dim},
                   {"item_counts", config.item_counts},
                   {"trials", config.trials},
                   {"seed", config.seed},
                   {"candidates", config.candidates}};
  for (const auto& r : rows) {
    report.table.push_back({{"n_items", r.n_items},
                            {"recall_accuracy", r.recall_accuracy},
                            {"mean_top_score", r.mean_top_score}});
    report.metrics["recall_accuracy_n" + std::to_string(r.n_items)] = r.recall_accuracy;
  }
  return report;
}

}  // namespace wavefield
