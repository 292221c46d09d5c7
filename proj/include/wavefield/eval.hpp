#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavefield/super_trace.hpp"

namespace wavefield {

// Machine-readable outcome of one evaluation suite.
//
// `config` echoes every input needed to rerun the suite. `metrics` and
// `failures` are deterministic for a given config; wall-clock measurements
// live only in `timing`, with the machine in `hardware`.
struct EvalReport {
  std::string suite;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, double> metrics;
  std::vector<std::string> failures;
  nlohmann::json table = nlohmann::json::array();
  std::optional<nlohmann::json> timing;
  std::optional<std::string> hardware;

  nlohmann::json to_json() const;
};

struct NegationEvalConfig {
  std::size_t dim = 256;
  std::size_t n_base_words = 100;
  std::size_t n_distractors = 1000;
  std::uint64_t seed = 7;
  std::size_t threads = 1;
};

// Stores map(w) and map("not " + w) for seeded pseudo-words next to random
// distractors, then asks for every "not w". Which of the pair gets the lower
// id is a seeded coin flip, so the baseline's exact ties are not resolved
// in its favour or against it by construction.
EvalReport run_negation_eval(const NegationEvalConfig& config);

// Seeded pseudo-words that parse to themselves under the default rules.
std::vector<std::string> pseudo_words(std::size_t n, std::uint64_t seed);

struct LatencyBenchConfig {
  std::size_t dim = 256;
  std::size_t n_patterns = 100000;
  std::size_t n_queries = 100;
  std::uint64_t seed = 0;
  std::size_t k = 10;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> store_dir;  // in memory when unset
};

EvalReport run_latency_bench(const LatencyBenchConfig& config);

EvalReport run_capacity_eval(const CapacityConfig& config);

std::string hardware_descriptor();

}  // namespace wavefield
