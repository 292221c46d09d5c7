#include "wavefield/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavefield/error.hpp"
#include "wavefield/eval.hpp"
#include "wavefield/generator.hpp"
#include "wavefield/mapper.hpp"
#include "wavefield/slot_store.hpp"
#include "wavefield/super_trace.hpp"

namespace wavefield {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kMapperSidecar = "mapper.json";
constexpr const char* kLabelSidecar = "labels.jsonl";

// How text is turned into patterns for one store or trace.
struct MapperConfig {
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::string lexicon;  // empty: seeded lexicon
  std::string rules;    // empty: default rules

  Mapper make() const {
    Lexicon lex = lexicon.empty() ? Lexicon::seeded(dim, seed) : Lexicon::load(lexicon, dim, seed);
    RuleSet rs = rules.empty() ? RuleSet::defaults() : RuleSet::load(rules);
    return Mapper(std::move(lex), std::move(rs));
  }

  json to_json() const {
    return {{"dim", dim}, {"seed", seed}, {"lexicon", lexicon}, {"rules", rules}};
  }

  static MapperConfig from_json(const json& doc) {
    MapperConfig c;
    c.dim = doc.at("dim").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.lexicon = doc.value("lexicon", "");
    c.rules = doc.value("rules", "");
    return c;
  }
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StoreIO, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorCode::StoreIO, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

WavePattern pattern_from_json(const json& doc, const std::string& where) {
  if (!doc.is_object() || !doc.contains("amplitude") || !doc.contains("phase")) {
    throw Error(ErrorCode::MalformedInput, where + ": expected {\"amplitude\": [...], \"phase\": [...]}");
  }
  try {
    return WavePattern(doc["amplitude"].get<std::vector<double>>(), doc["phase"].get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, where + ": " + e.what());
  }
}

MapperConfig store_mapper(const SlotStore& store) {
  const fs::path sidecar = store.path() / kMapperSidecar;
  if (fs::exists(sidecar)) return MapperConfig::from_json(read_json_file(sidecar));
  MapperConfig c;
  c.dim = store.dim();
  c.seed = store.seed();
  return c;
}

std::map<std::uint64_t, std::string> read_labels(const fs::path& dir) {
  std::map<std::uint64_t, std::string> labels;
  std::ifstream in(dir / kLabelSidecar);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.contains("id") || !doc.contains("label")) {
      throw Error(ErrorCode::CorruptStore, std::string(kLabelSidecar) + ": bad line");
    }
    labels[doc["id"].get<std::uint64_t>()] = doc["label"].get<std::string>();
  }
  return labels;
}

void write_labels(const fs::path& dir, const std::map<std::uint64_t, std::string>& labels) {
  std::string text;
  for (const auto& [id, label] : labels) text += json{{"id", id}, {"label", label}}.dump() + "\n";
  write_text_file(dir / kLabelSidecar, text);
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << "\n"; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Probe source shared by put and query: exactly one of --text / --pattern.
struct ProbeArgs {
  std::string text;
  std::string pattern_file;

  void attach(CLI::App* cmd) {
    auto* t = cmd->add_option("--text", text, "text mapped through the store's lexicon");
    auto* p = cmd->add_option("--pattern", pattern_file, "JSON file {amplitude, phase}");
    t->excludes(p);
  }

  bool given() const { return !text.empty() || !pattern_file.empty(); }

  WavePattern resolve(const MapperConfig& mc) const {
    if (!pattern_file.empty()) return pattern_from_json(read_json_file(pattern_file), pattern_file);
    return mc.make().map(text);
  }
};

struct Args {
  // shared
  std::string store_dir;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::string kernel = "coherence";
  std::size_t k = 10;
  std::size_t threads = 1;
  std::string lexicon;
  std::string rules;
  // build / put / delete
  std::string input;
  std::uint64_t id = 0;
  std::string label;
  ProbeArgs probe;
  // assoc
  std::string trace_file;
  std::string key;
  std::string value;
  double noise_floor = kDefaultNoiseFloor;
  // generate
  std::string kb;
  std::string query;
  std::size_t max_steps = 8;
  std::string encoding = "slot_store";
  // eval / bench / capacity
  std::size_t n = 100;
  std::size_t distractors = 1000;
  std::size_t queries = 100;
  std::string bench_dir;
  std::vector<std::size_t> items{10, 50, 100, 200, 500};
  std::size_t trials = 100;
  std::size_t candidates = 100;
};

int run_build(const Args& a, std::ostream& out, std::ostream& err) {
  MapperConfig mc{a.dim, a.seed, a.lexicon.empty() ? "" : fs::absolute(a.lexicon).string(),
                  a.rules.empty() ? "" : fs::absolute(a.rules).string()};
  const Mapper mapper = mc.make();
  mc.dim = mapper.dim();

  std::ifstream in(a.input);
  if (!in) throw Error(ErrorCode::StoreIO, "cannot read " + a.input);
  SlotStore store = SlotStore::create(a.store_dir, {.dim = mc.dim, .kernel_default = kernel_from_string(a.kernel), .seed = a.seed});
  write_text_file(fs::path(a.store_dir) / kMapperSidecar, mc.to_json().dump(2) + "\n");

  std::map<std::uint64_t, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t next_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = a.input + " line " + std::to_string(line_no);
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::MalformedInput, where + ": not a JSON object");
    const std::uint64_t id = doc.contains("id") ? doc["id"].get<std::uint64_t>() : next_id;
    next_id = id + 1;
    std::string label;
    WavePattern p;
    if (doc.contains("text")) {
      label = doc["text"].get<std::string>();
      p = mapper.map(label);
    } else if (doc.contains("s") && doc.contains("r") && doc.contains("o")) {
      // A fact line is stored as its full statement.
      label = doc["s"].get<std::string>() + " " + doc["r"].get<std::string>() + " " + doc["o"].get<std::string>();
      std::replace(label.begin(), label.end(), '-', ' ');
      p = mapper.map(label);
    } else {
      p = pattern_from_json(doc, where);
    }
    if (doc.contains("label")) label = doc["label"].get<std::string>();
    store.put(id, p);
    if (!label.empty()) labels[id] = label;
  }
  store.flush();
  write_labels(a.store_dir, labels);
  emit(out, {{"command", "build"},
             {"dim", store.dim()},
             {"records", store.live_count()},
             {"segments", store.segment_count()},
             {"checksum", hex64(store.checksum())}});
  err << "built " << a.store_dir << ": " << store.live_count() << " records, dim " << store.dim() << "\n";
  return 0;
}

int run_put(const Args& a, std::ostream& out, std::ostream& err) {
  SlotStore store = SlotStore::open(a.store_dir);
  const MapperConfig mc = store_mapper(store);
  store.put(a.id, a.probe.resolve(mc));
  store.flush();
  std::string label = a.label.empty() ? a.probe.text : a.label;
  if (!label.empty()) {
    auto labels = read_labels(a.store_dir);
    labels[a.id] = label;
    write_labels(a.store_dir, labels);
  }
  emit(out, {{"command", "put"}, {"id", a.id}, {"records", store.live_count()}});
  err << "put id " << a.id << "\n";
  return 0;
}

int run_delete(const Args& a, std::ostream& out, std::ostream& err) {
  SlotStore store = SlotStore::open(a.store_dir);
  store.remove(a.id);
  store.flush();
  emit(out, {{"command", "delete"}, {"id", a.id}, {"records", store.live_count()}});
  err << "deleted id " << a.id << "\n";
  return 0;
}

int run_compact(const Args& a, std::ostream& out, std::ostream& err) {
  SlotStore store = SlotStore::open(a.store_dir);
  const std::size_t before = store.record_count();
  store.compact();
  emit(out, {{"command", "compact"},
             {"records_before", before},
             {"records", store.record_count()},
             {"segments", store.segment_count()}});
  err << "compacted " << before << " -> " << store.record_count() << " records\n";
  return 0;
}

int run_query(const Args& a, std::ostream& out, std::ostream& err) {
  const SlotStore store = SlotStore::open(a.store_dir);
  const MapperConfig mc = store_mapper(store);
  const Kernel kernel = kernel_from_string(a.kernel);
  const auto hits = store.query_topk(a.probe.resolve(mc), a.k, {.kernel = kernel, .threads = a.threads});
  const auto labels = read_labels(a.store_dir);
  json results = json::array();
  for (const auto& h : hits) {
    json r{{"rank", h.rank}, {"id", h.id}, {"score", h.score.value}};
    if (auto it = labels.find(h.id); it != labels.end()) r["label"] = it->second;
    results.push_back(std::move(r));
  }
  emit(out, {{"command", "query"}, {"kernel", to_string(kernel)}, {"k", a.k}, {"results", results}});
  err << hits.size() << " results";
  if (!hits.empty()) err << ", top id " << hits.front().id << " score " << hits.front().score.value;
  err << "\n";
  return 0;
}

// Trace file: {"mapper": {...}, "trace": {...}}.
int run_assoc_store(const Args& a, std::ostream& out, std::ostream& err) {
  MapperConfig mc;
  std::optional<SuperTrace> trace;
  if (fs::exists(a.trace_file)) {
    const json doc = read_json_file(a.trace_file);
    mc = MapperConfig::from_json(doc.at("mapper"));
    trace = SuperTrace::from_json(doc.at("trace"));
  } else {
    mc = {a.dim, a.seed, a.lexicon.empty() ? "" : fs::absolute(a.lexicon).string(),
          a.rules.empty() ? "" : fs::absolute(a.rules).string()};
    trace.emplace(mc.make().dim());
  }
  const Mapper mapper = mc.make();
  const std::string label = a.label.empty() ? a.value : a.label;
  if (trace->value_memory().contains(label)) {
    trace->link_assoc(mapper.map(a.key), label);
  } else {
    trace->store_assoc(mapper.map(a.key), mapper.map(a.value), label);
  }
  write_text_file(a.trace_file, json{{"mapper", mc.to_json()}, {"trace", trace->to_json()}}.dump() + "\n");
  emit(out, {{"command", "assoc-store"}, {"label", label}, {"pairs", trace->pair_count()}});
  err << "stored '" << a.key << "' -> " << label << " (" << trace->pair_count() << " pairs)\n";
  return 0;
}

int run_assoc_recall(const Args& a, std::ostream& out, std::ostream& err) {
  const json doc = read_json_file(a.trace_file);
  const MapperConfig mc = MapperConfig::from_json(doc.at("mapper"));
  const SuperTrace trace = SuperTrace::from_json(doc.at("trace"));
  const auto got = trace.recall_assoc(mc.make().map(a.key), a.k, a.noise_floor);
  json matches = json::array();
  for (const auto& m : got.matches) matches.push_back({{"label", m.label}, {"score", m.score.value}});
  emit(out, {{"command", "assoc-recall"},
             {"key", a.key},
             {"matches", matches},
             {"below_threshold", got.below_threshold}});
  err << "recalled " << (got.matches.empty() ? std::string("nothing") : got.matches.front().label)
      << (got.below_threshold ? " (below noise floor)" : "") << "\n";
  return 0;
}

int run_generate(const Args& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.kb);
  if (!in) throw Error(ErrorCode::StoreIO, "cannot read " + a.kb);
  const MapperConfig mc{a.dim, a.seed, a.lexicon, a.rules};
  const KbEncoding enc = a.encoding == "super_trace" ? KbEncoding::super_trace : KbEncoding::slot_store;
  const FactKB kb(mc.make(), read_facts_jsonl(in), enc);
  const Generation gen = generate(a.query, kb, {.max_steps = a.max_steps, .noise_floor = a.noise_floor});
  json history = json::array();
  for (const auto& s : gen.probe_history) {
    history.push_back({{"step", s.step}, {"label", s.label}, {"score", s.score}, {"below_threshold", s.below_threshold}});
  }
  emit(out, {{"command", "generate"},
             {"query", a.query},
             {"config", {{"dim", a.dim}, {"seed", a.seed}, {"max_steps", a.max_steps},
                         {"noise_floor", a.noise_floor}, {"encoding", to_string(enc)}}},
             {"tokens", gen.tokens},
             {"stop", to_string(gen.stop)},
             {"probe_history", history}});
  err << "generated [";
  for (std::size_t i = 0; i < gen.tokens.size(); ++i) err << (i ? " " : "") << gen.tokens[i];
  err << "], stop: " << to_string(gen.stop) << "\n";
  return 0;
}

int run_eval_negation(const Args& a, std::ostream& out, std::ostream& err) {
  const EvalReport r = run_negation_eval(
      {.dim = a.dim, .n_base_words = a.n, .n_distractors = a.distractors, .seed = a.seed, .threads = a.threads});
  emit(out, r.to_json());
  err << "negation precision@1: resonance " << r.metrics.at("precision_at_1_resonance")
      << ", amplitude cosine " << r.metrics.at("precision_at_1_amplitude_cosine") << "\n";
  return 0;
}

int run_bench_latency(const Args& a, std::ostream& out, std::ostream& err) {
  LatencyBenchConfig cfg{.dim = a.dim, .n_patterns = a.n, .n_queries = a.queries,
                         .seed = a.seed, .k = a.k, .threads = a.threads, .store_dir = std::nullopt};
  if (!a.bench_dir.empty()) cfg.store_dir = a.bench_dir;
  const EvalReport r = run_latency_bench(cfg);
  emit(out, r.to_json());
  err << "latency: mean " << (*r.timing)["mean_query_micros"].get<double>() << " us/query, "
      << (*r.timing)["comparisons_per_sec"].get<double>() << " comparisons/s on " << *r.hardware << "\n";
  return 0;
}

int run_capacity(const Args& a, std::ostream& out, std::ostream& err) {
  const EvalReport r = run_capacity_eval(
      {.dim = a.dim, .item_counts = a.items, .trials = a.trials, .seed = a.seed, .candidates = a.candidates});
  emit(out, r.to_json());
  for (const auto& row : r.table) {
    err << "n=" << row["n_items"].get<std::size_t>() << " accuracy " << row["recall_accuracy"].get<double>() << "\n";
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase-aware wave-pattern memory: store, query, associate, generate, evaluate.", "wavefield"};
  app.require_subcommand(1);
  Args a;

  auto kernel_opt = [&](CLI::App* cmd) {
    cmd->add_option("--kernel", a.kernel, "coherence | energy | amplitude_cosine")
        ->check(CLI::IsMember({"coherence", "energy", "amplitude_cosine"}));
  };
  auto mapper_opts = [&](CLI::App* cmd) {
    cmd->add_option("--dim", a.dim, "pattern dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", a.seed, "seed");
    cmd->add_option("--lexicon", a.lexicon, "embedding file (lexeme<TAB>values)")->check(CLI::ExistingFile);
    cmd->add_option("--rules", a.rules, "morphology rule file")->check(CLI::ExistingFile);
  };

  auto* build = app.add_subcommand("build", "ingest a JSONL file into a new store");
  build->add_option("--store", a.store_dir, "store directory")->required();
  build->add_option("--input", a.input, "JSONL records: {text} | {s,r,o} | {amplitude,phase}, optional id and label")
      ->required()->check(CLI::ExistingFile);
  mapper_opts(build);
  kernel_opt(build);

  auto* put = app.add_subcommand("put", "add one pattern to a store");
  put->add_option("--store", a.store_dir, "store directory")->required();
  put->add_option("--id", a.id, "record id")->required();
  put->add_option("--label", a.label, "label recorded next to the id");
  a.probe.attach(put);

  auto* del = app.add_subcommand("delete", "tombstone a record");
  del->add_option("--store", a.store_dir, "store directory")->required();
  del->add_option("--id", a.id, "record id")->required();

  auto* query = app.add_subcommand("query", "top-k resonance query");
  query->add_option("--store", a.store_dir, "store directory")->required();
  query->add_option("--k", a.k, "results to return")->check(CLI::PositiveNumber);
  query->add_option("--threads", a.threads, "scan threads")->check(CLI::PositiveNumber);
  kernel_opt(query);
  a.probe.attach(query);

  auto* compact = app.add_subcommand("compact", "drop tombstoned records");
  compact->add_option("--store", a.store_dir, "store directory")->required();

  auto* astore = app.add_subcommand("assoc-store", "bind a key/value pair into a trace file");
  astore->add_option("--trace", a.trace_file, "trace JSON file, created if absent")->required();
  astore->add_option("--key", a.key, "key text")->required();
  astore->add_option("--value", a.value, "value text")->required();
  astore->add_option("--label", a.label, "value label (defaults to the value text)");
  mapper_opts(astore);

  auto* arecall = app.add_subcommand("assoc-recall", "unbind a key and clean up against stored values");
  arecall->add_option("--trace", a.trace_file, "trace JSON file")->required()->check(CLI::ExistingFile);
  arecall->add_option("--key", a.key, "key text")->required();
  arecall->add_option("--k", a.k, "matches to return")->check(CLI::PositiveNumber);
  arecall->add_option("--noise-floor", a.noise_floor, "no-match threshold");

  auto* gen = app.add_subcommand("generate", "resonance-driven generation over a fact base");
  gen->add_option("--kb", a.kb, "facts JSONL {s, r, o}")->required()->check(CLI::ExistingFile);
  gen->add_option("--query", a.query, "query text")->required();
  gen->add_option("--max-steps", a.max_steps, "step bound")->check(CLI::PositiveNumber);
  gen->add_option("--noise-floor", a.noise_floor, "stop threshold");
  gen->add_option("--encoding", a.encoding, "slot_store | super_trace")
      ->check(CLI::IsMember({"slot_store", "super_trace"}));
  mapper_opts(gen);

  auto* eval = app.add_subcommand("eval", "evaluation suites");
  eval->require_subcommand(1);
  auto* neg = eval->add_subcommand("negation", "negation precision@1, resonance vs amplitude cosine");
  neg->add_option("--dim", a.dim, "pattern dimension")->check(CLI::PositiveNumber);
  neg->add_option("--n", a.n, "base words")->check(CLI::PositiveNumber);
  neg->add_option("--distractors", a.distractors, "random distractor patterns");
  neg->add_option("--seed", a.seed, "seed");
  neg->add_option("--threads", a.threads, "scan threads")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "benchmarks");
  bench->require_subcommand(1);
  auto* lat = bench->add_subcommand("latency", "full-scan query latency");
  lat->add_option("--dim", a.dim, "pattern dimension")->check(CLI::PositiveNumber);
  lat->add_option("--n", a.n, "stored patterns")->check(CLI::PositiveNumber);
  lat->add_option("--queries", a.queries, "queries to time")->check(CLI::PositiveNumber);
  lat->add_option("--k", a.k, "top-k per query")->check(CLI::PositiveNumber);
  lat->add_option("--seed", a.seed, "seed");
  lat->add_option("--threads", a.threads, "scan threads")->check(CLI::PositiveNumber);
  lat->add_option("--store-dir", a.bench_dir, "build the store on disk here instead of in memory");

  auto* cap = app.add_subcommand("capacity", "superposition capacity sweep");
  cap->add_option("--dim", a.dim, "pattern dimension")->check(CLI::PositiveNumber);
  cap->add_option("--items", a.items, "pair counts")->delimiter(',');
  cap->add_option("--trials", a.trials, "trials per count")->check(CLI::PositiveNumber);
  cap->add_option("--candidates", a.candidates, "value memory size");
  cap->add_option("--seed", a.seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  if ((put->parsed() || query->parsed()) && !a.probe.given()) {
    err << "error: one of --text or --pattern is required\n";
    return 1;
  }
  // Defaults that differ per subcommand.
  if (cap->parsed() && cap->count("--dim") == 0) a.dim = 1024;
  if (gen->parsed() && gen->count("--dim") == 0) a.dim = 1024;

  try {
    if (build->parsed()) return run_build(a, out, err);
    if (put->parsed()) return run_put(a, out, err);
    if (del->parsed()) return run_delete(a, out, err);
    if (query->parsed()) return run_query(a, out, err);
    if (compact->parsed()) return run_compact(a, out, err);
    if (astore->parsed()) return run_assoc_store(a, out, err);
    if (arecall->parsed()) return run_assoc_recall(a, out, err);
    if (gen->parsed()) return run_generate(a, out, err);
    if (neg->parsed()) return run_eval_negation(a, out, err);
    if (lat->parsed()) return run_bench_latency(a, out, err);
    if (cap->parsed()) return run_capacity(a, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_data_error(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: StoreIO: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "error: MalformedInput: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace wavefield
