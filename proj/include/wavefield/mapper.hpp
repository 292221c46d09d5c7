#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wavefield/wave.hpp"

namespace wavefield {

// ---------------------------------------------------------------------------
// Lexicon
// ---------------------------------------------------------------------------

enum class LexiconSource { seeded, file };

// Lexeme → unit-length base vector. A seeded lexicon derives each vector
// from hash(lexeme) XOR seed, so it covers every lexeme and never fails;
// a file lexicon only knows what it loaded.
class Lexicon {
 public:
  static Lexicon seeded(std::size_t dim, std::uint64_t seed);

  // Embedding text format: `lexeme<TAB>f1 f2 ... fdim` per line. Vectors are
  // normalized on load. `dim` = 0 takes the dimension from the first entry.
  static Lexicon load(const std::filesystem::path& path, std::size_t dim = 0,
                      std::uint64_t seed = 0);
  static Lexicon parse(std::istream& in, std::size_t dim = 0, std::uint64_t seed = 0);

  std::size_t dim() const noexcept { return dim_; }
  LexiconSource source() const noexcept { return source_; }
  // Also keys the role phasors used by multiplex.
  std::uint64_t seed() const noexcept { return seed_; }

  bool contains(std::string_view lexeme) const;
  // Throws UnknownLexeme for a file lexicon that lacks `lexeme`.
  std::vector<double> vector(std::string_view lexeme) const;

 private:
  Lexicon(std::size_t dim, LexiconSource source, std::uint64_t seed)
      : dim_(dim), source_(source), seed_(seed) {}

  std::size_t dim_;
  LexiconSource source_;
  std::uint64_t seed_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// ---------------------------------------------------------------------------
// Morphology rules
// ---------------------------------------------------------------------------

enum class AffixKind { prefix, suffix, token };
enum class MorphScope { attached_root, next_content_word };

struct MorphRule {
  std::string trigger;  // bare text: "un", "ality", "not"
  AffixKind kind = AffixKind::token;
  double delta = std::numbers::pi;  // 0 marks a recorded, non-modulating affix
  MorphScope scope = MorphScope::next_content_word;
  // Optional subspace: when non-empty, only dimensions with a nonzero entry
  // are shifted. Empty means the full spectrum.
  std::vector<std::uint8_t> subspace;

  // "un-", "-ality", "not".
  std::string id() const;
};

class RuleSet {
 public:
  RuleSet() = default;

  // Negating prefixes un-/in-/non-/dis- and tokens not/never/no shift by π;
  // suffixes -ality/-ness/-ing/-ed are stripped without modulation.
  static RuleSet defaults();

  // Lines `trigger<TAB>kind<TAB>delta_radians<TAB>scope`; '#' starts a comment.
  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(std::istream& in);

  // Throws InvalidArgument on an empty trigger, delta outside [0, 2π), a
  // scope that does not fit the kind, or a duplicate trigger.
  void add(MorphRule rule);

  const std::vector<MorphRule>& rules() const noexcept { return rules_; }
  const MorphRule* find(AffixKind kind, std::string_view trigger) const;
  const MorphRule& by_id(std::string_view id) const;

 private:
  std::vector<MorphRule> rules_;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

enum class Role { subject, predicate, object, modifier, neutral };

std::string_view to_string(Role role) noexcept;

struct ParsedUnit {
  std::string root;
  std::vector<std::string> affixes;  // rule ids, in application order
  Role role = Role::neutral;

  friend bool operator==(const ParsedUnit&, const ParsedUnit&) = default;
};

bool is_stop_word(std::string_view token);

// Lowercased tokens; hyphens and apostrophes are kept inside words.
std::vector<std::string> tokenize(std::string_view text);

// Strips rule affixes, attaches negator tokens to the next content word and
// assigns roles by position: a lone unit is neutral, otherwise subject,
// predicate, object, then modifier for the rest.
// Throws EmptyInput when nothing remains, DanglingNegator for a trailing
// negator.
std::vector<ParsedUnit> parse(std::string_view text, const RuleSet& rules);

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

// Sign-to-phase: amplitude |v|, phase 0 for v ≥ 0 and π otherwise.
WavePattern encode_base(std::span<const double> v);

WavePattern apply_morph(const WavePattern& p, const MorphRule& rule);

// Unit-amplitude phasor keyed by (role, seed).
WavePattern role_phasor(Role role, std::size_t dim, std::uint64_t seed);
// Element-wise phasor product, i.e. phase addition.
WavePattern bind_role(const WavePattern& p, Role role, std::uint64_t seed);
WavePattern unbind_role(const WavePattern& p, Role role, std::uint64_t seed);

struct RoleUnit {
  Role role;
  WavePattern pattern;
};

// Σ bind_role(unit) over the units, normalized. Throws EmptyInput,
// DimMismatch, or ZeroEnergy if the bound units cancel completely.
WavePattern multiplex(std::span<const RoleUnit> units, std::uint64_t seed);

// Base vector of the unit's root, sign-to-phase encoded, with every affix
// rule applied. Ignores the unit's role.
WavePattern encode_unit(const ParsedUnit& unit, const Lexicon& lex, const RuleSet& rules);

// parse → encode_unit → multiplex.
WavePattern map_text(std::string_view text, const Lexicon& lex, const RuleSet& rules);

// A lexicon and rule set travelling together.
class Mapper {
 public:
  Mapper(Lexicon lex, RuleSet rules) : lex_(std::move(lex)), rules_(std::move(rules)) {}

  WavePattern map(std::string_view text) const { return map_text(text, lex_, rules_); }
  std::vector<ParsedUnit> parse(std::string_view text) const {
    return wavefield::parse(text, rules_);
  }
  WavePattern encode(const ParsedUnit& unit) const { return encode_unit(unit, lex_, rules_); }

  const Lexicon& lexicon() const noexcept { return lex_; }
  const RuleSet& rules() const noexcept { return rules_; }
  std::size_t dim() const noexcept { return lex_.dim(); }
  std::uint64_t seed() const noexcept { return lex_.seed(); }

 private:
  Lexicon lex_;
  RuleSet rules_;
};

}  // namespace wavefield
