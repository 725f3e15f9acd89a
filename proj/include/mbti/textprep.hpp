#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mbti/corpus.hpp"

namespace mbti {

inline constexpr const char* kUrlPlaceholder = "<URL>";
inline constexpr const char* kTypePlaceholder = "<TYPE>";

struct CleanStats {
  std::size_t urls_replaced = 0;
  std::size_t runs_collapsed = 0;   // character runs longer than 3 cut to 3
  std::size_t types_scrubbed = 0;   // literal MBTI codes replaced
};

struct CleanOptions {
  bool scrub_type_mentions = true;  // replace literal MBTI codes to avoid label leakage
};

// URL -> <URL>, punctuation stripped except sentence terminators and
// emoticons, character runs capped at 3, optional MBTI-code scrub.
// Idempotent: clean(clean(x)) == clean(x).
std::string clean(const std::string& text, CleanOptions options = {});
std::string clean(const std::string& text, CleanStats& stats, CleanOptions options = {});

struct TokenRange {
  std::size_t begin = 0;  // token index, inclusive
  std::size_t end = 0;    // exclusive

  bool operator==(const TokenRange&) const = default;
};

struct Tokenized {
  std::vector<std::string> tokens;    // lowercase; emoticons kept as single tokens
  std::vector<TokenRange> sentences;  // disjoint, ordered, non-empty ranges
};

Tokenized tokenize(const std::string& text);

bool is_emoticon_token(const std::string& token);

struct StopwordList {
  std::set<std::string> words;
  std::string source;

  bool contains(const std::string& w) const { return words.count(w) != 0; }
};

StopwordList load_stopwords(const std::filesystem::path& path);

struct LemmaTable {
  std::map<std::string, std::string> exceptions;
  std::string version;
};

LemmaTable load_lemma_table(const std::filesystem::path& path);

// Rule-based suffix stripping with an exception table; never empty for a
// non-empty input.
std::string lemmatize(const std::string& token, const LemmaTable& table);
std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& list);

struct ProcessedDoc {
  std::vector<std::string> tokens;  // function words intact, emoticons/URLs removed
  std::vector<std::string> lemmas;  // parallel to tokens
  std::vector<TokenRange> sentences;
  std::map<std::string, std::size_t> emoticon_counts;
  std::size_t url_count = 0;
  std::size_t repeated_char_runs_collapsed = 0;

  bool operator==(const ProcessedDoc&) const = default;
};

struct PreprocessOptions {
  bool do_clean = true;
  bool scrub_type_mentions = true;
};

// clean -> tokenize -> lemmatize over the concatenation of a record's posts
// (a sentence break is inserted between posts). Emoticons and URL
// placeholders are counted, then dropped from the token stream. Stopwords
// are kept here; the TF-IDF path filters them via tfidf_terms.
ProcessedDoc preprocess(const PostRecord& record, const LemmaTable& lemmas,
                        PreprocessOptions options = {});
ProcessedDoc preprocess(const std::vector<std::string>& posts, const LemmaTable& lemmas,
                        PreprocessOptions options = {});

struct TermOptions {
  bool remove_stopwords = true;
  bool use_lemmas = true;
};

std::vector<std::string> tfidf_terms(const ProcessedDoc& doc, const StopwordList& stopwords,
                                     TermOptions options = {});

}  // namespace mbti
