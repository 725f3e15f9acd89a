#pragma once

#include <array>
#include <string>
#include <vector>

#include "mbti/corpus.hpp"
#include "mbti/lexicons.hpp"
#include "mbti/textprep.hpp"

namespace mbti {

inline constexpr std::size_t kHandcraftedFeatureCount =
    kSentimentCategoryCount + kAspectCategoryCount + kSyntacticTermCount;  // 27

// Normalized per-category rates: sentiment and aspects per token, grammar
// per sentence. All values in [0,1].
struct HandcraftedFeatures {
  std::array<double, kSentimentCategoryCount> sentiment{};
  std::array<double, kAspectCategoryCount> aspects{};
  std::array<double, kSyntacticTermCount> grammar{};

  std::array<double, kHandcraftedFeatureCount> flat() const;
  bool operator==(const HandcraftedFeatures&) const = default;
};

// Column names in flat() order, prefixed by analysis family
// ("sentiment:WeakPositive", "aspect:Commercial", "grammar:MainVerbActive").
const std::vector<std::string>& handcrafted_column_names();

template <std::size_t N>
struct AnalyzerBlock {
  std::array<double, N> counts{};      // weighted raw match counts
  std::array<double, N> normalized{};  // counts / denominator, clamped to [0,1]
};

AnalyzerBlock<kSentimentCategoryCount> analyze_sentiment(const ProcessedDoc& doc,
                                                         const SentimentLexicon& lex);
AnalyzerBlock<kAspectCategoryCount> analyze_aspects(const ProcessedDoc& doc,
                                                    const AspectLexicon& lex);
AnalyzerBlock<kSyntacticTermCount> analyze_grammar(const ProcessedDoc& doc,
                                                   const GrammarRuleSet& rules);

HandcraftedFeatures analyze_all(const ProcessedDoc& doc, const LexiconBundle& lexicons);

// Letter columns of the occurrence tables, pair by pair.
inline constexpr std::array<char, 8> kOccurrenceLetters = {'I', 'E', 'N', 'S',
                                                           'T', 'F', 'J', 'P'};

struct OccurrenceTable {
  std::vector<std::string> row_names;
  std::vector<std::array<double, 8>> cells;  // percent of total category mass
  std::vector<std::string> warnings;         // empty-category rows
};

// Shares of each category's total mass attributed to records carrying each
// letter. Every record contributes to one letter per pair, so each pair's
// two cells sum to 25% of the row.
OccurrenceTable occurrence_table(const std::vector<std::vector<double>>& category_mass,
                                 const std::vector<DichotomyLabels>& labels,
                                 const std::vector<std::string>& row_names);

std::string occurrence_table_to_csv(const OccurrenceTable& table, const std::string& corner_label);

}  // namespace mbti
