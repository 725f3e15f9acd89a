#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mbti/util/error.hpp"

namespace mbti {

// ---------------------------------------------------------------- sentiment

enum class SentimentCategory : std::uint8_t {
  GeneralRequest,
  MajorProblem,
  MinorProblem,
  Neutral,
  Request,
  StrongNegative,
  StrongPositive,
  WeakNegative,
  WeakPositive,
};

inline constexpr std::size_t kSentimentCategoryCount = 9;

const std::array<std::string, kSentimentCategoryCount>& sentiment_category_ids();
const std::array<std::string, kSentimentCategoryCount>& sentiment_category_display_names();
SentimentCategory sentiment_category_from_id(const std::string& id);

struct SentimentEntry {
  std::string pattern;  // token or space-separated n-gram, lowercase
  SentimentCategory category;
  double weight = 1.0;
};

struct ProfanityEntry {
  std::string term;
  bool ambiguous = false;  // context-dependent; counted only near a negative match
};

struct SentimentLexicon {
  std::string version;
  std::vector<SentimentEntry> entries;
  std::set<std::string> negations;
  std::map<std::string, SentimentCategory> emoticon_polarity;
  std::vector<ProfanityEntry> profanity;

  bool operator==(const SentimentLexicon&) const = default;
};

inline bool operator==(const SentimentEntry& a, const SentimentEntry& b) {
  return a.pattern == b.pattern && a.category == b.category && a.weight == b.weight;
}
inline bool operator==(const ProfanityEntry& a, const ProfanityEntry& b) {
  return a.term == b.term && a.ambiguous == b.ambiguous;
}

// ------------------------------------------------------------------ aspects

enum class AspectCategory : std::uint8_t {
  Commercial,
  Country,
  RegionMajor,
  Educational,
  Media,
  Other,
  Entertainment,
  Government,
  Domestic,
  Water,
};

inline constexpr std::size_t kAspectCategoryCount = 10;

const std::array<std::string, kAspectCategoryCount>& aspect_category_ids();
const std::array<std::string, kAspectCategoryCount>& aspect_category_display_names();
AspectCategory aspect_category_from_id(const std::string& id);

struct AspectLexicon {
  std::string version;
  std::map<std::string, AspectCategory> entries;  // term -> exactly one category

  bool operator==(const AspectLexicon&) const = default;
};

// ------------------------------------------------------------------ grammar

enum class SyntacticTerm : std::uint8_t {
  MainVerbActive,
  DirectObject,
  Subject,
  Predicate,
  MainVerbCopula,
  PredicateSubject,
  IndirectObject,
  MainVerbPassive,
};

inline constexpr std::size_t kSyntacticTermCount = 8;

const std::array<std::string, kSyntacticTermCount>& syntactic_term_ids();
const std::array<std::string, kSyntacticTermCount>& syntactic_term_display_names();

// part-of-speech tag bits
namespace pos {
inline constexpr std::uint16_t Noun = 1u << 0;
inline constexpr std::uint16_t Pronoun = 1u << 1;
inline constexpr std::uint16_t Verb = 1u << 2;
inline constexpr std::uint16_t PastParticiple = 1u << 3;
inline constexpr std::uint16_t Adjective = 1u << 4;
inline constexpr std::uint16_t Adverb = 1u << 5;
inline constexpr std::uint16_t Determiner = 1u << 6;
inline constexpr std::uint16_t Preposition = 1u << 7;
inline constexpr std::uint16_t Be = 1u << 8;
inline constexpr std::uint16_t Conjunction = 1u << 9;
}  // namespace pos

std::uint16_t pos_tag_from_name(const std::string& name);
std::vector<std::string> pos_tag_names(std::uint16_t tags);

struct GrammarPattern {
  SyntacticTerm term;
  std::vector<std::uint16_t> sequence;  // tag masks, matched in order
};

struct GrammarRuleSet {
  std::string version;
  std::map<std::string, std::uint16_t> pos_lexicon;  // token -> tag set
  std::vector<GrammarPattern> patterns;              // ordered; first match wins

  bool operator==(const GrammarRuleSet&) const = default;
};

inline bool operator==(const GrammarPattern& a, const GrammarPattern& b) {
  return a.term == b.term && a.sequence == b.sequence;
}

// ------------------------------------------------------------------ loading

class LexiconError : public FormatError {
 public:
  LexiconError(const std::string& what, const std::string& json_pointer)
      : FormatError(what + " (at " + json_pointer + ")"), pointer_(json_pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

SentimentLexicon load_sentiment_lexicon(const std::filesystem::path& path);
AspectLexicon load_aspect_lexicon(const std::filesystem::path& path);
GrammarRuleSet load_grammar_rules(const std::filesystem::path& path);

SentimentLexicon parse_sentiment_lexicon(const std::string& json_text);
AspectLexicon parse_aspect_lexicon(const std::string& json_text);
GrammarRuleSet parse_grammar_rules(const std::string& json_text);

std::string save_sentiment_lexicon(const SentimentLexicon& lex);
std::string save_aspect_lexicon(const AspectLexicon& lex);
std::string save_grammar_rules(const GrammarRuleSet& rules);

// Warnings only: duplicate patterns, zero weights, corpus coverage.
std::vector<std::string> validate_lexicon(const SentimentLexicon& lex,
                                          const std::set<std::string>* corpus_vocab = nullptr);
std::vector<std::string> validate_lexicon(const AspectLexicon& lex,
                                          const std::set<std::string>* corpus_vocab = nullptr);
std::vector<std::string> validate_lexicon(const GrammarRuleSet& rules,
                                          const std::set<std::string>* corpus_vocab = nullptr);

struct LexiconBundle {
  SentimentLexicon sentiment;
  AspectLexicon aspects;
  GrammarRuleSet grammar;
};

// Loads sentiment_lexicon.json, aspect_lexicon.json and grammar_rules.json
// from a resource directory.
LexiconBundle load_lexicon_bundle(const std::filesystem::path& dir);

}  // namespace mbti
