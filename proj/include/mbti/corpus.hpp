#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mbti/util/error.hpp"

namespace mbti {

// The four binary axes of the 16-code type system.
enum class Dichotomy { IE, NS, FT, JP };

constexpr std::array<Dichotomy, 4> kAllDichotomies = {Dichotomy::IE, Dichotomy::NS,
                                                      Dichotomy::FT, Dichotomy::JP};

std::string dichotomy_name(Dichotomy d);        // "IE", "NS", "FT", "JP"
Dichotomy dichotomy_from_name(const std::string& name);
char dichotomy_first_letter(Dichotomy d);       // I, N, F, J
char dichotomy_second_letter(Dichotomy d);      // E, S, T, P

struct DichotomyLabels {
  bool ie = false;  // true = I
  bool ns = false;  // true = N
  bool ft = false;  // true = F
  bool jp = false;  // true = J

  bool first_of(Dichotomy d) const;
  bool operator==(const DichotomyLabels&) const = default;
};

DichotomyLabels decompose_labels(const std::string& code);
std::string recompose_labels(const DichotomyLabels& labels);
bool is_valid_code(const std::string& code);

struct PostRecord {
  std::string mbti_code;           // one of the 16 valid codes
  std::vector<std::string> posts;  // split from the raw field on the separator
  DichotomyLabels labels;
};

struct CorpusProvenance {
  std::string source_path;
  std::string load_timestamp;  // ISO-8601, informational only
  std::uint64_t resample_seed = 0;
  bool resampled = false;
};

struct Corpus {
  std::vector<PostRecord> records;
  CorpusProvenance provenance;
  bool duplicates_found = false;  // duplicate (code, posts) rows seen at load
};

struct Histogram {
  double bin_width = 0.0;
  std::vector<std::size_t> counts;  // bin i covers [i*bin_width, (i+1)*bin_width)
};

struct CorpusStats {
  std::vector<std::pair<std::string, std::size_t>> type_counts;  // 16 codes, fixed order
  std::vector<std::pair<std::string, double>> type_shares;
  // per dichotomy: share of the first letter (I, N, F, J)
  std::array<double, 4> first_letter_shares{};
  Histogram char_lengths;  // characters per record (posts concatenated)
  Histogram word_lengths;  // whitespace-delimited words per record
  // Pearson correlation between the four first-letter indicator variables,
  // order IE, NS, FT, JP
  std::array<std::array<double, 4>, 4> pearson{};
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

// CSV with header columns `type` and `posts`; posts split on `separator`.
// Rows with an invalid code are rejected: the error names the offending
// data row (1-based, excluding the header).
Corpus load_corpus(const std::filesystem::path& path, const std::string& separator = "|||");
Corpus corpus_from_rows(const std::vector<std::pair<std::string, std::string>>& rows,
                        const std::string& separator = "|||",
                        const std::string& source = "<memory>");

CorpusStats compute_stats(const Corpus& corpus);
std::string stats_to_json(const CorpusStats& stats);

// Seeded undersampling of the majority class to a 50/50 split on `d`.
Corpus balance(const Corpus& corpus, Dichotomy d, std::uint64_t seed);

// Near-uniform 16-type undersampling (every present type cut to the size of
// the smallest present type), used for the occurrence-table analyses.
Corpus balance_uniform16(const Corpus& corpus, std::uint64_t seed);

struct SplitResult {
  Corpus train;
  Corpus test;
};

// Stratified on the dichotomy label; deterministic per seed.
SplitResult split(const Corpus& corpus, double test_fraction, Dichotomy d, std::uint64_t seed);

}  // namespace mbti
