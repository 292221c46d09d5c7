#include "wavefield/mapper.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavefield/error.hpp"
#include "wavefield/random.hpp"

namespace wavefield {

namespace {

constexpr std::size_t kMinRootLength = 3;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, const std::string& where) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::InvalidVector, where + ": not a number '" + std::string(field) + "'");
  }
  return v;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

// ---------------------------------------------------------------------------
// Lexicon

Lexicon Lexicon::seeded(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "lexicon dim must be positive");
  return Lexicon(dim, LexiconSource::seeded, seed);
}

Lexicon Lexicon::load(const std::filesystem::path& path, std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StoreIO, "cannot open lexicon " + path.string());
  return parse(in, dim, seed);
}

Lexicon Lexicon::parse(std::istream& in, std::size_t dim, std::uint64_t seed) {
  Lexicon lex(dim, LexiconSource::file, seed);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = "lexicon line " + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(ErrorCode::InvalidVector, where + ": expected lexeme<TAB>values");
    }
    std::string lexeme = line.substr(0, tab);
    std::vector<double> v;
    std::istringstream fields(line.substr(tab + 1));
    std::string field;
    while (fields >> field) v.push_back(parse_double(field, where));
    if (lex.dim_ == 0) lex.dim_ = v.size();
    if (v.size() != lex.dim_) {
      throw Error(ErrorCode::DimMismatch, where + ": " + std::to_string(v.size()) +
                                              " values, expected " + std::to_string(lex.dim_));
    }
    double norm2 = 0.0;
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::InvalidVector, where + ": non-finite value");
      norm2 += x * x;
    }
    if (norm2 == 0.0) throw Error(ErrorCode::InvalidVector, where + ": zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    if (!lex.table_.emplace(lexeme, std::move(v)).second) {
      throw Error(ErrorCode::DuplicateLabel, where + ": duplicate lexeme '" + lexeme + "'");
    }
  }
  if (lex.dim_ == 0) throw Error(ErrorCode::EmptyInput, "lexicon file has no entries");
  return lex;
}

bool Lexicon::contains(std::string_view lexeme) const {
  return source_ == LexiconSource::seeded || table_.contains(std::string(lexeme));
}

std::vector<double> Lexicon::vector(std::string_view lexeme) const {
  if (source_ == LexiconSource::seeded) {
    Rng rng(fnv1a64(lexeme) ^ seed_);
    return rng.unit_vector(dim_);
  }
  const auto it = table_.find(std::string(lexeme));
  if (it == table_.end()) throw Error(ErrorCode::UnknownLexeme, std::string(lexeme));
  return it->second;
}

// ---------------------------------------------------------------------------
// Rules

std::string MorphRule::id() const {
  switch (kind) {
    case AffixKind::prefix: return trigger + "-";
    case AffixKind::suffix: return "-" + trigger;
    case AffixKind::token: return trigger;
  }
  return trigger;
}

RuleSet RuleSet::defaults() {
  RuleSet set;
  constexpr double pi = std::numbers::pi;
  for (const char* p : {"un", "in", "non", "dis"}) {
    set.add({p, AffixKind::prefix, pi, MorphScope::attached_root, {}});
  }
  for (const char* t : {"not", "never", "no"}) {
    set.add({t, AffixKind::token, pi, MorphScope::next_content_word, {}});
  }
  for (const char* s : {"ality", "ness", "ing", "ed"}) {
    set.add({s, AffixKind::suffix, 0.0, MorphScope::attached_root, {}});
  }
  return set;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StoreIO, "cannot open rule file " + path.string());
  return parse(in);
}

RuleSet RuleSet::parse(std::istream& in) {
  RuleSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::string where = "rule line " + std::to_string(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw Error(ErrorCode::InvalidArgument, where + ": expected 4 tab-separated fields");
    }
    MorphRule rule;
    rule.trigger = fields[0];
    if (fields[1] == "prefix") {
      rule.kind = AffixKind::prefix;
    } else if (fields[1] == "suffix") {
      rule.kind = AffixKind::suffix;
    } else if (fields[1] == "token") {
      rule.kind = AffixKind::token;
    } else {
      throw Error(ErrorCode::InvalidArgument, where + ": unknown kind '" + fields[1] + "'");
    }
    try {
      rule.delta = parse_double(fields[2], where);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, e.what());
    }
    if (fields[3] == "attached_root") {
      rule.scope = MorphScope::attached_root;
    } else if (fields[3] == "next_content_word") {
      rule.scope = MorphScope::next_content_word;
    } else {
      throw Error(ErrorCode::InvalidArgument, where + ": unknown scope '" + fields[3] + "'");
    }
    set.add(std::move(rule));
  }
  return set;
}

void RuleSet::add(MorphRule rule) {
  if (rule.trigger.empty()) throw Error(ErrorCode::InvalidArgument, "rule trigger is empty");
  if (!(rule.delta >= 0.0 && rule.delta < kTwoPi)) {
    throw Error(ErrorCode::InvalidArgument, "rule " + rule.id() + ": delta outside [0, 2pi)");
  }
  const bool token = rule.kind == AffixKind::token;
  if (token != (rule.scope == MorphScope::next_content_word)) {
    throw Error(ErrorCode::InvalidArgument,
                "rule " + rule.id() + ": tokens scope the next content word, affixes their root");
  }
  const bool clash = std::any_of(rules_.begin(), rules_.end(), [&](const MorphRule& r) {
    return r.trigger == rule.trigger && r.kind == rule.kind;
  });
  if (clash) throw Error(ErrorCode::InvalidArgument, "duplicate rule trigger " + rule.id());
  rules_.push_back(std::move(rule));
}

const MorphRule* RuleSet::find(AffixKind kind, std::string_view trigger) const {
  for (const auto& r : rules_) {
    if (r.kind == kind && r.trigger == trigger) return &r;
  }
  return nullptr;
}

const MorphRule& RuleSet::by_id(std::string_view id) const {
  for (const auto& r : rules_) {
    if (r.id() == id) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "no rule with id '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Parsing

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::subject: return "subject";
    case Role::predicate: return "predicate";
    case Role::object: return "object";
    case Role::modifier: return "modifier";
    case Role::neutral: return "neutral";
  }
  return "unknown";
}

bool is_stop_word(std::string_view token) {
  static constexpr std::array<std::string_view, 41> kStop = {
      "a",     "an",  "the",  "of",   "is",   "are",   "was",   "were",  "be",
      "been",  "am",  "did",  "do",   "does", "to",    "in",    "on",    "at",
      "by",    "for", "with", "and",  "or",   "what",  "which", "who",   "whom",
      "whose", "it",  "its",  "this", "that", "these", "those", "as",    "from",
      "has",   "have", "had", "than", "then"};
  return std::find(kStop.begin(), kStop.end(), token) != kStop.end();
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if ((c == '-' || c == '\'') && !current.empty() && i + 1 < text.size() &&
               is_word_char(text[i + 1])) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

// Longest matching affix of `kind` that leaves a root of usable length.
const MorphRule* match_affix(const RuleSet& rules, AffixKind kind, std::string_view word) {
  const MorphRule* best = nullptr;
  for (const auto& r : rules.rules()) {
    if (r.kind != kind || r.trigger.size() + kMinRootLength > word.size()) continue;
    const bool hit = kind == AffixKind::prefix ? word.starts_with(r.trigger)
                                               : word.ends_with(r.trigger);
    if (hit && (best == nullptr || r.trigger.size() > best->trigger.size())) best = &r;
  }
  return best;
}

}  // namespace

std::vector<ParsedUnit> parse(std::string_view text, const RuleSet& rules) {
  if (trim(text).empty()) throw Error(ErrorCode::EmptyInput, "empty text");
  std::vector<ParsedUnit> units;
  std::vector<std::string> pending;
  for (auto& token : tokenize(text)) {
    if (const MorphRule* r = rules.find(AffixKind::token, token)) {
      pending.push_back(r->id());
      continue;
    }
    if (is_stop_word(token)) continue;
    ParsedUnit unit;
    unit.affixes = std::move(pending);
    pending.clear();
    std::string root = std::move(token);
    if (const MorphRule* p = match_affix(rules, AffixKind::prefix, root)) {
      unit.affixes.push_back(p->id());
      root.erase(0, p->trigger.size());
    }
    if (const MorphRule* s = match_affix(rules, AffixKind::suffix, root)) {
      unit.affixes.push_back(s->id());
      root.erase(root.size() - s->trigger.size());
    }
    unit.root = std::move(root);
    units.push_back(std::move(unit));
  }
  if (!pending.empty()) {
    throw Error(ErrorCode::DanglingNegator, "'" + pending.back() + "' has no following content word");
  }
  if (units.empty()) throw Error(ErrorCode::EmptyInput, "no content words in '" + std::string(text) + "'");
  if (units.size() == 1) {
    units.front().role = Role::neutral;
  } else {
    constexpr std::array<Role, 3> kPositional = {Role::subject, Role::predicate, Role::object};
    for (std::size_t i = 0; i < units.size(); ++i) {
      units[i].role = i < kPositional.size() ? kPositional[i] : Role::modifier;
    }
  }
  return units;
}

// ---------------------------------------------------------------------------
// Encoding

WavePattern encode_base(std::span<const double> v) {
  std::vector<double> amp(v.size());
  std::vector<double> ph(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::InvalidVector, "component " + std::to_string(i) + " not finite");
    }
    amp[i] = std::abs(v[i]);
    ph[i] = v[i] < 0.0 ? std::numbers::pi : 0.0;
  }
  return WavePattern(std::move(amp), std::move(ph));
}

WavePattern apply_morph(const WavePattern& p, const MorphRule& rule) {
  if (rule.subspace.empty()) return rule.delta == 0.0 ? p : phase_shift(p, rule.delta);
  if (rule.subspace.size() != p.dim()) {
    throw Error(ErrorCode::DimMismatch, "rule " + rule.id() + " subspace length " +
                                            std::to_string(rule.subspace.size()) + " vs dim " +
                                            std::to_string(p.dim()));
  }
  std::vector<double> mask(p.dim());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rule.subspace[i] ? rule.delta : 0.0;
  return phase_shift(p, mask);
}

WavePattern role_phasor(Role role, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed ^ fnv1a64(std::string("role:") + std::string(to_string(role))));
  std::vector<double> ph(dim);
  for (double& x : ph) x = kTwoPi * rng.uniform();
  return WavePattern(std::vector<double>(dim, 1.0), std::move(ph));
}

WavePattern bind_role(const WavePattern& p, Role role, std::uint64_t seed) {
  const WavePattern phasor = role_phasor(role, p.dim(), seed);
  return phase_shift(p, phasor.phase());
}

WavePattern unbind_role(const WavePattern& p, Role role, std::uint64_t seed) {
  const WavePattern phasor = role_phasor(role, p.dim(), seed);
  std::vector<double> neg(phasor.phase().begin(), phasor.phase().end());
  for (double& x : neg) x = -x;
  return phase_shift(p, neg);
}

WavePattern multiplex(std::span<const RoleUnit> units, std::uint64_t seed) {
  if (units.empty()) throw Error(ErrorCode::EmptyInput, "multiplex of no units");
  // A lone unit skips the complex round trip so its amplitudes survive
  // bit-for-bit (the negation invariant relies on it).
  if (units.size() == 1) return normalize(bind_role(units.front().pattern, units.front().role, seed));
  const std::size_t dim = units.front().pattern.dim();
  std::vector<std::complex<double>> sum(dim);
  for (const auto& u : units) {
    if (u.pattern.dim() != dim) {
      throw Error(ErrorCode::DimMismatch, "multiplex unit dim " +
                                              std::to_string(u.pattern.dim()) + " vs " +
                                              std::to_string(dim));
    }
    const auto bound = bind_role(u.pattern, u.role, seed).to_complex();
    for (std::size_t i = 0; i < dim; ++i) sum[i] += bound[i];
  }
  return normalize(WavePattern::from_complex(sum));
}

WavePattern encode_unit(const ParsedUnit& unit, const Lexicon& lex, const RuleSet& rules) {
  WavePattern p = encode_base(lex.vector(unit.root));
  for (const auto& id : unit.affixes) p = apply_morph(p, rules.by_id(id));
  return p;
}

WavePattern map_text(std::string_view text, const Lexicon& lex, const RuleSet& rules) {
  const auto units = parse(text, rules);
  std::vector<RoleUnit> bound;
  bound.reserve(units.size());
  for (const auto& u : units) bound.push_back({u.role, encode_unit(u, lex, rules)});
  return multiplex(bound, lex.seed());
}

}  // namespace wavefield
