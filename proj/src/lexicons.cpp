#include "mbti/lexicons.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mbti/util/io.hpp"

namespace mbti {

namespace {

using nlohmann::json;

std::string lower_copy(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

const json& require(const json& j, const char* key, const std::string& pointer) {
  if (!j.contains(key)) throw LexiconError(std::string("missing key `") + key + "`", pointer);
  return j.at(key);
}

}  // namespace

const std::array<std::string, kSentimentCategoryCount>& sentiment_category_ids() {
  static const std::array<std::string, kSentimentCategoryCount> ids = {
      "GeneralRequest", "MajorProblem",   "MinorProblem", "Neutral",      "Request",
      "StrongNegative", "StrongPositive", "WeakNegative", "WeakPositive"};
  return ids;
}

const std::array<std::string, kSentimentCategoryCount>& sentiment_category_display_names() {
  static const std::array<std::string, kSentimentCategoryCount> names = {
      "General Request", "Major Problem",  "Minor Problem", "Neutral Sentiment", "Request",
      "Strong Negative", "Strong Positive", "Weak Negative", "Weak Positive"};
  return names;
}

SentimentCategory sentiment_category_from_id(const std::string& id) {
  const auto& ids = sentiment_category_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<SentimentCategory>(i);
  }
  throw InvalidArgument("unknown sentiment category: " + id);
}

const std::array<std::string, kAspectCategoryCount>& aspect_category_ids() {
  static const std::array<std::string, kAspectCategoryCount> ids = {
      "Commercial", "Country",       "RegionMajor", "Educational", "Media",
      "Other",      "Entertainment", "Government",  "Domestic",    "Water"};
  return ids;
}

const std::array<std::string, kAspectCategoryCount>& aspect_category_display_names() {
  static const std::array<std::string, kAspectCategoryCount> names = {
      "Commercial", "Country",       "Region Major", "Educational", "Media",
      "Other",      "Entertainment", "Government",   "Domestic",    "Water"};
  return names;
}

AspectCategory aspect_category_from_id(const std::string& id) {
  const auto& ids = aspect_category_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return static_cast<AspectCategory>(i);
  }
  throw InvalidArgument("unknown aspect category: " + id);
}

const std::array<std::string, kSyntacticTermCount>& syntactic_term_ids() {
  static const std::array<std::string, kSyntacticTermCount> ids = {
      "MainVerbActive", "DirectObject",     "Subject",        "Predicate",
      "MainVerbCopula", "PredicateSubject", "IndirectObject", "MainVerbPassive"};
  return ids;
}

const std::array<std::string, kSyntacticTermCount>& syntactic_term_display_names() {
  static const std::array<std::string, kSyntacticTermCount> names = {
      "Main Verb - Active", "Direct Object",     "Subject",         "Predicate",
      "Main Verb - Copula", "Predicate Subject", "Indirect Object", "MainVerb - Passive"};
  return names;
}

std::uint16_t pos_tag_from_name(const std::string& name) {
  if (name == "NOUN") return pos::Noun;
  if (name == "PRON") return pos::Pronoun;
  if (name == "VERB") return pos::Verb;
  if (name == "PASTPART") return pos::PastParticiple;
  if (name == "ADJ") return pos::Adjective;
  if (name == "ADV") return pos::Adverb;
  if (name == "DET") return pos::Determiner;
  if (name == "PREP") return pos::Preposition;
  if (name == "BE") return pos::Be;
  if (name == "CONJ") return pos::Conjunction;
  throw InvalidArgument("unknown POS tag: " + name);
}

std::vector<std::string> pos_tag_names(std::uint16_t tags) {
  static const std::pair<std::uint16_t, const char*> table[] = {
      {pos::Noun, "NOUN"},         {pos::Pronoun, "PRON"},   {pos::Verb, "VERB"},
      {pos::PastParticiple, "PASTPART"}, {pos::Adjective, "ADJ"},  {pos::Adverb, "ADV"},
      {pos::Determiner, "DET"},    {pos::Preposition, "PREP"}, {pos::Be, "BE"},
      {pos::Conjunction, "CONJ"}};
  std::vector<std::string> names;
  for (const auto& [bit, name] : table) {
    if (tags & bit) names.emplace_back(name);
  }
  return names;
}

SentimentLexicon parse_sentiment_lexicon(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LexiconError(std::string("invalid JSON: ") + e.what(), "/");
  }
  SentimentLexicon lex;
  lex.version = j.value("version", "unversioned");

  const json& entries = require(j, "entries", "/");
  if (!entries.is_array()) throw LexiconError("`entries` must be an array", "/entries");
  if (entries.empty()) throw LexiconError("empty lexicon: no entries", "/entries");
  std::set<std::pair<std::string, SentimentCategory>> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string pointer = "/entries/" + std::to_string(i);
    const json& e = entries[i];
    SentimentEntry entry;
    entry.pattern = lower_copy(require(e, "pattern", pointer).get<std::string>());
    if (entry.pattern.empty()) throw LexiconError("empty pattern", pointer + "/pattern");
    const std::string cat = require(e, "category", pointer).get<std::string>();
    try {
      entry.category = sentiment_category_from_id(cat);
    } catch (const InvalidArgument&) {
      throw LexiconError("unknown category name `" + cat + "`", pointer + "/category");
    }
    entry.weight = e.value("weight", 1.0);
    if (!std::isfinite(entry.weight)) throw LexiconError("weight not finite", pointer + "/weight");
    if (!seen.insert({entry.pattern, entry.category}).second) {
      throw LexiconError("duplicate (pattern, category) pair `" + entry.pattern + "`", pointer);
    }
    lex.entries.push_back(std::move(entry));
  }

  if (j.contains("negations")) {
    const json& negs = j["negations"];
    for (std::size_t i = 0; i < negs.size(); ++i) {
      lex.negations.insert(lower_copy(negs[i].get<std::string>()));
    }
  }
  if (j.contains("emoticon_polarity")) {
    for (const auto& [glyph, cat] : j["emoticon_polarity"].items()) {
      try {
        lex.emoticon_polarity[glyph] = sentiment_category_from_id(cat.get<std::string>());
      } catch (const InvalidArgument&) {
        throw LexiconError("unknown category name `" + cat.get<std::string>() + "`",
                           "/emoticon_polarity/" + glyph);
      }
    }
  }
  if (j.contains("profanity")) {
    const json& prof = j["profanity"];
    for (std::size_t i = 0; i < prof.size(); ++i) {
      const std::string pointer = "/profanity/" + std::to_string(i);
      ProfanityEntry p;
      p.term = lower_copy(require(prof[i], "term", pointer).get<std::string>());
      p.ambiguous = prof[i].value("ambiguous", false);
      lex.profanity.push_back(std::move(p));
    }
  }
  return lex;
}

AspectLexicon parse_aspect_lexicon(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LexiconError(std::string("invalid JSON: ") + e.what(), "/");
  }
  AspectLexicon lex;
  lex.version = j.value("version", "unversioned");
  const json& entries = require(j, "entries", "/");
  if (!entries.is_object()) throw LexiconError("`entries` must be an object", "/entries");
  if (entries.empty()) throw LexiconError("empty lexicon: no entries", "/entries");
  for (const auto& [term, cat] : entries.items()) {
    try {
      lex.entries[lower_copy(term)] = aspect_category_from_id(cat.get<std::string>());
    } catch (const InvalidArgument&) {
      throw LexiconError("unknown category name `" + cat.get<std::string>() + "`",
                         "/entries/" + term);
    }
  }
  return lex;
}

GrammarRuleSet parse_grammar_rules(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LexiconError(std::string("invalid JSON: ") + e.what(), "/");
  }
  GrammarRuleSet rules;
  rules.version = j.value("version", "unversioned");
  const json& lexicon = require(j, "pos", "/");
  if (lexicon.empty()) throw LexiconError("empty lexicon: no pos entries", "/pos");
  for (const auto& [token, tags] : lexicon.items()) {
    std::uint16_t mask = 0;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      try {
        mask |= pos_tag_from_name(tags[i].get<std::string>());
      } catch (const InvalidArgument& e) {
        throw LexiconError(e.what(), "/pos/" + token + "/" + std::to_string(i));
      }
    }
    rules.pos_lexicon[lower_copy(token)] = mask;
  }
  const json& patterns = require(j, "patterns", "/");
  const auto& term_ids = syntactic_term_ids();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const std::string pointer = "/patterns/" + std::to_string(i);
    GrammarPattern p;
    const std::string term = require(patterns[i], "term", pointer).get<std::string>();
    const auto it = std::find(term_ids.begin(), term_ids.end(), term);
    if (it == term_ids.end()) {
      throw LexiconError("unknown syntactic term `" + term + "`", pointer + "/term");
    }
    p.term = static_cast<SyntacticTerm>(it - term_ids.begin());
    const json& seq = require(patterns[i], "sequence", pointer);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      // an element is one tag name or an array of alternatives
      std::uint16_t mask = 0;
      try {
        if (seq[k].is_array()) {
          for (const auto& alt : seq[k]) mask |= pos_tag_from_name(alt.get<std::string>());
        } else {
          mask = pos_tag_from_name(seq[k].get<std::string>());
        }
      } catch (const InvalidArgument& e) {
        throw LexiconError(e.what(), pointer + "/sequence/" + std::to_string(k));
      }
      p.sequence.push_back(mask);
    }
    rules.patterns.push_back(std::move(p));
  }
  return rules;
}

SentimentLexicon load_sentiment_lexicon(const std::filesystem::path& path) {
  return parse_sentiment_lexicon(read_text_file(path));
}
AspectLexicon load_aspect_lexicon(const std::filesystem::path& path) {
  return parse_aspect_lexicon(read_text_file(path));
}
GrammarRuleSet load_grammar_rules(const std::filesystem::path& path) {
  return parse_grammar_rules(read_text_file(path));
}

std::string save_sentiment_lexicon(const SentimentLexicon& lex) {
  json j;
  j["version"] = lex.version;
  j["entries"] = json::array();
  for (const auto& e : lex.entries) {
    j["entries"].push_back({{"pattern", e.pattern},
                            {"category", sentiment_category_ids()[static_cast<int>(e.category)]},
                            {"weight", e.weight}});
  }
  j["negations"] = lex.negations;
  for (const auto& [glyph, cat] : lex.emoticon_polarity) {
    j["emoticon_polarity"][glyph] = sentiment_category_ids()[static_cast<int>(cat)];
  }
  j["profanity"] = json::array();
  for (const auto& p : lex.profanity) {
    j["profanity"].push_back({{"term", p.term}, {"ambiguous", p.ambiguous}});
  }
  return j.dump(2);
}

std::string save_aspect_lexicon(const AspectLexicon& lex) {
  json j;
  j["version"] = lex.version;
  j["entries"] = json::object();
  for (const auto& [term, cat] : lex.entries) {
    j["entries"][term] = aspect_category_ids()[static_cast<int>(cat)];
  }
  return j.dump(2);
}

std::string save_grammar_rules(const GrammarRuleSet& rules) {
  json j;
  j["version"] = rules.version;
  j["pos"] = json::object();
  for (const auto& [token, mask] : rules.pos_lexicon) j["pos"][token] = pos_tag_names(mask);
  j["patterns"] = json::array();
  for (const auto& p : rules.patterns) {
    json seq = json::array();
    for (std::uint16_t tag : p.sequence) {
      const auto names = pos_tag_names(tag);
      if (names.size() == 1) {
        seq.push_back(names.front());
      } else {
        seq.push_back(names);
      }
    }
    j["patterns"].push_back(
        {{"term", syntactic_term_ids()[static_cast<int>(p.term)]}, {"sequence", seq}});
  }
  return j.dump(2);
}

std::vector<std::string> validate_lexicon(const SentimentLexicon& lex,
                                          const std::set<std::string>* corpus_vocab) {
  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> pattern_count;
  std::map<std::pair<std::string, SentimentCategory>, std::size_t> pair_count;
  for (const auto& e : lex.entries) {
    ++pattern_count[e.pattern];
    ++pair_count[{e.pattern, e.category}];
    if (e.weight == 0.0) warnings.push_back("zero weight for pattern `" + e.pattern + "`");
  }
  for (const auto& [pair, n] : pair_count) {
    if (n > 1) {
      warnings.push_back("duplicate entries for pattern `" + pair.first + "` in category " +
                         sentiment_category_ids()[static_cast<int>(pair.second)]);
    }
  }
  for (const auto& [pattern, n] : pattern_count) {
    if (n > 1 && pair_count.size() != pattern_count.size()) {
      // pattern listed under several categories
      std::size_t distinct = 0;
      for (const auto& [pair, cnt] : pair_count) {
        if (pair.first == pattern) ++distinct;
      }
      if (distinct > 1) {
        warnings.push_back("pattern `" + pattern + "` appears in " + std::to_string(distinct) +
                           " categories");
      }
    }
  }
  if (corpus_vocab) {
    std::size_t covered = 0, unigrams = 0;
    for (const auto& e : lex.entries) {
      if (e.pattern.find(' ') != std::string::npos) continue;
      ++unigrams;
      if (corpus_vocab->count(e.pattern)) ++covered;
    }
    if (unigrams > 0 && covered == 0) {
      warnings.push_back("0% coverage: no unigram pattern occurs in the corpus vocabulary");
    }
  }
  return warnings;
}

std::vector<std::string> validate_lexicon(const AspectLexicon& lex,
                                          const std::set<std::string>* corpus_vocab) {
  std::vector<std::string> warnings;
  if (corpus_vocab) {
    std::size_t covered = 0;
    for (const auto& [term, cat] : lex.entries) {
      if (corpus_vocab->count(term)) ++covered;
    }
    if (!lex.entries.empty() && covered == 0) {
      warnings.push_back("0% coverage: no aspect term occurs in the corpus vocabulary");
    }
  }
  std::array<std::size_t, kAspectCategoryCount> per_cat{};
  for (const auto& [term, cat] : lex.entries) ++per_cat[static_cast<int>(cat)];
  for (std::size_t c = 0; c < kAspectCategoryCount; ++c) {
    if (per_cat[c] == 0) {
      warnings.push_back("category " + aspect_category_ids()[c] + " has no terms");
    }
  }
  return warnings;
}

std::vector<std::string> validate_lexicon(const GrammarRuleSet& rules,
                                          const std::set<std::string>* corpus_vocab) {
  std::vector<std::string> warnings;
  if (rules.patterns.empty()) warnings.push_back("no patterns defined");
  if (corpus_vocab) {
    std::size_t covered = 0;
    for (const auto& [token, mask] : rules.pos_lexicon) {
      if (corpus_vocab->count(token)) ++covered;
    }
    if (!rules.pos_lexicon.empty() && covered == 0) {
      warnings.push_back("0% coverage: no POS-lexicon token occurs in the corpus vocabulary");
    }
  }
  return warnings;
}

LexiconBundle load_lexicon_bundle(const std::filesystem::path& dir) {
  LexiconBundle bundle;
  bundle.sentiment = load_sentiment_lexicon(dir / "sentiment_lexicon.json");
  bundle.aspects = load_aspect_lexicon(dir / "aspect_lexicon.json");
  bundle.grammar = load_grammar_rules(dir / "grammar_rules.json");
  return bundle;
}

}  // namespace mbti
