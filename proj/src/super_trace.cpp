#include "wavefield/super_trace.hpp"

#include <algorithm>

#include "wavefield/error.hpp"
#include "wavefield/random.hpp"

namespace wavefield {

using json = nlohmann::json;

SuperTrace::SuperTrace(std::size_t dim) : sum_(dim), values_(dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "trace dim must be positive");
}

void SuperTrace::accumulate(const WavePattern& bound, double sign) {
  const auto c = bound.to_complex();
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += sign * c[i];
}

void SuperTrace::store_assoc(const WavePattern& key, const WavePattern& value, std::string label) {
  if (key.dim() != dim() || value.dim() != dim()) {
    throw Error(ErrorCode::DimMismatch, "trace dim " + std::to_string(dim()));
  }
  if (values_.contains(label)) throw Error(ErrorCode::DuplicateLabel, label);
  const WavePattern bound = bind(key, value);
  values_.add(std::move(label), value);
  accumulate(bound, 1.0);
  ++pairs_;
}

void SuperTrace::register_value(std::string label, const WavePattern& value) {
  if (value.dim() != dim()) throw Error(ErrorCode::DimMismatch, "trace dim " + std::to_string(dim()));
  values_.add(std::move(label), value);
}

void SuperTrace::link_assoc(const WavePattern& key, const std::string& label) {
  if (key.dim() != dim()) throw Error(ErrorCode::DimMismatch, "trace dim " + std::to_string(dim()));
  accumulate(bind(key, values_.at(label)), 1.0);
  ++pairs_;
}

void SuperTrace::remove_assoc(const WavePattern& key, const WavePattern& value) {
  if (pairs_ == 0) throw Error(ErrorCode::EmptyMemory, "remove from empty trace");
  accumulate(bind(key, value), -1.0);
  --pairs_;
}

CleanupResult SuperTrace::recall_assoc(const WavePattern& key, std::size_t k,
                                       double noise_floor) const {
  if (pairs_ == 0 || values_.empty()) throw Error(ErrorCode::EmptyMemory, "recall from empty trace");
  return cleanup(unbind(trace(), key), values_, k, noise_floor);
}

WavePattern SuperTrace::trace() const { return WavePattern::from_complex(sum_); }

json SuperTrace::to_json() const {
  json values = json::array();
  for (const auto& e : values_.entries()) {
    values.push_back({{"label", e.label},
                      {"amplitude", std::vector<double>(e.pattern.amplitude().begin(), e.pattern.amplitude().end())},
                      {"phase", std::vector<double>(e.pattern.phase().begin(), e.pattern.phase().end())}});
  }
  std::vector<double> re(sum_.size());
  std::vector<double> im(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    re[i] = sum_[i].real();
    im[i] = sum_[i].imag();
  }
  return {{"dim", dim()}, {"pair_count", pairs_}, {"trace_re", re}, {"trace_im", im}, {"values", values}};
}

SuperTrace SuperTrace::from_json(const json& doc) {
  try {
    SuperTrace t(doc.at("dim").get<std::size_t>());
    const auto re = doc.at("trace_re").get<std::vector<double>>();
    const auto im = doc.at("trace_im").get<std::vector<double>>();
    if (re.size() != t.dim() || im.size() != t.dim()) {
      throw Error(ErrorCode::CorruptStore, "trace arrays do not match dim");
    }
    for (std::size_t i = 0; i < t.dim(); ++i) t.sum_[i] = {re[i], im[i]};
    for (const auto& v : doc.at("values")) {
      t.values_.add(v.at("label").get<std::string>(),
                    WavePattern(v.at("amplitude").get<std::vector<double>>(),
                                v.at("phase").get<std::vector<double>>()));
    }
    t.pairs_ = doc.at("pair_count").get<std::size_t>();
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptStore, std::string("trace document: ") + e.what());
  }
}

std::vector<CapacityRow> capacity_probe(const CapacityConfig& config) {
  if (config.dim == 0) throw Error(ErrorCode::InvalidArgument, "dim must be >= 1");
  if (config.trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (config.item_counts.empty()) throw Error(ErrorCode::InvalidArgument, "no item counts given");
  for (std::size_t n : config.item_counts) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "item counts must be >= 1");
  }
  std::vector<std::size_t> counts = config.item_counts;
  std::sort(counts.begin(), counts.end());

  const Rng root(config.seed);
  std::vector<CapacityRow> rows;
  for (std::size_t n : counts) {
    std::size_t correct = 0;
    double score_sum = 0.0;
    for (std::size_t t = 0; t < config.trials; ++t) {
      Rng rng = root.fork(n).fork(t);
      const std::size_t m = std::max(n, config.candidates);
      std::vector<WavePattern> keys;
      keys.reserve(n);
      for (std::size_t i = 0; i < n; ++i) keys.push_back(rng.pattern(config.dim));
      SuperTrace trace(config.dim);
      for (std::size_t i = 0; i < m; ++i) {
        WavePattern value = rng.pattern(config.dim);
        if (i < n) {
          trace.store_assoc(keys[i], value, "v" + std::to_string(i));
        } else {
          // Distractor values compete in cleanup but are never bound.
          trace.register_value("v" + std::to_string(i), value);
        }
      }
      const std::size_t target = rng.below(n);
      const auto got = trace.recall_assoc(keys[target], 1);
      correct += got.matches.front().label == "v" + std::to_string(target);
      score_sum += got.matches.front().score.value;
    }
    rows.push_back({n, static_cast<double>(correct) / static_cast<double>(config.trials),
                    score_sum / static_cast<double>(config.trials)});
  }
  return rows;
}

}  // namespace wavefield
