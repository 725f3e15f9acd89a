#include "mbti/analyzers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>

namespace mbti {

namespace {

constexpr std::size_t kNegationWindow = 2;   // tokens before a polarity match
constexpr std::size_t kProfanityWindow = 3;  // distance to a negative match

bool is_polarity(SentimentCategory c) {
  return c == SentimentCategory::StrongPositive || c == SentimentCategory::WeakPositive ||
         c == SentimentCategory::StrongNegative || c == SentimentCategory::WeakNegative;
}

bool is_negative_polarity(SentimentCategory c) {
  return c == SentimentCategory::StrongNegative || c == SentimentCategory::WeakNegative;
}

SentimentCategory flip_polarity(SentimentCategory c) {
  switch (c) {
    case SentimentCategory::StrongPositive: return SentimentCategory::StrongNegative;
    case SentimentCategory::StrongNegative: return SentimentCategory::StrongPositive;
    case SentimentCategory::WeakPositive: return SentimentCategory::WeakNegative;
    case SentimentCategory::WeakNegative: return SentimentCategory::WeakPositive;
    default: return c;
  }
}

struct PatternIndex {
  // first token -> patterns sharing it, longest first
  std::map<std::string, std::vector<std::size_t>> by_first_token;
  std::vector<std::vector<std::string>> pattern_tokens;
  std::vector<std::vector<std::pair<SentimentCategory, double>>> pattern_entries;

  explicit PatternIndex(const SentimentLexicon& lex) {
    std::map<std::string, std::size_t> pattern_slot;
    for (const auto& entry : lex.entries) {
      auto [it, inserted] = pattern_slot.try_emplace(entry.pattern, pattern_tokens.size());
      if (inserted) {
        std::vector<std::string> toks;
        std::string cur;
        for (char c : entry.pattern) {
          if (c == ' ') {
            if (!cur.empty()) toks.push_back(std::move(cur));
            cur.clear();
          } else {
            cur.push_back(c);
          }
        }
        if (!cur.empty()) toks.push_back(std::move(cur));
        pattern_tokens.push_back(std::move(toks));
        pattern_entries.emplace_back();
      }
      pattern_entries[it->second].emplace_back(entry.category, entry.weight);
    }
    for (std::size_t p = 0; p < pattern_tokens.size(); ++p) {
      if (!pattern_tokens[p].empty()) {
        by_first_token[pattern_tokens[p].front()].push_back(p);
      }
    }
    for (auto& [tok, ids] : by_first_token) {
      std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return pattern_tokens[a].size() > pattern_tokens[b].size();
      });
    }
  }

  // longest pattern whose tokens match either the token or lemma stream at i
  std::size_t match_at(const ProcessedDoc& doc, std::size_t i, std::size_t end,
                       std::size_t& match_len) const {
    for (const std::string* key : {&doc.tokens[i], &doc.lemmas[i]}) {
      const auto it = by_first_token.find(*key);
      if (it == by_first_token.end()) continue;
      for (std::size_t p : it->second) {
        const auto& pat = pattern_tokens[p];
        if (i + pat.size() > end) continue;
        bool ok = true;
        for (std::size_t k = 0; k < pat.size(); ++k) {
          if (doc.tokens[i + k] != pat[k] && doc.lemmas[i + k] != pat[k]) {
            ok = false;
            break;
          }
        }
        if (ok) {
          match_len = pat.size();
          return p;
        }
      }
    }
    return static_cast<std::size_t>(-1);
  }
};

template <std::size_t N>
void finalize(AnalyzerBlock<N>& block, double denominator) {
  for (std::size_t i = 0; i < N; ++i) {
    double v = denominator > 0.0 ? block.counts[i] / denominator : 0.0;
    block.normalized[i] = std::clamp(v, 0.0, 1.0);
  }
}

}  // namespace

std::array<double, kHandcraftedFeatureCount> HandcraftedFeatures::flat() const {
  std::array<double, kHandcraftedFeatureCount> out{};
  std::size_t k = 0;
  for (double v : sentiment) out[k++] = v;
  for (double v : aspects) out[k++] = v;
  for (double v : grammar) out[k++] = v;
  return out;
}

const std::vector<std::string>& handcrafted_column_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& id : sentiment_category_ids()) v.push_back("sentiment:" + id);
    for (const auto& id : aspect_category_ids()) v.push_back("aspect:" + id);
    for (const auto& id : syntactic_term_ids()) v.push_back("grammar:" + id);
    return v;
  }();
  return names;
}

AnalyzerBlock<kSentimentCategoryCount> analyze_sentiment(const ProcessedDoc& doc,
                                                         const SentimentLexicon& lex) {
  AnalyzerBlock<kSentimentCategoryCount> block;
  const PatternIndex index(lex);

  std::map<std::string, bool> profanity_kind;
  for (const auto& p : lex.profanity) profanity_kind[p.term] = p.ambiguous;

  for (const auto& sentence : doc.sentences) {
    std::vector<std::pair<std::size_t, SentimentCategory>> matched;  // position -> category
    std::size_t i = sentence.begin;
    while (i < sentence.end) {
      std::size_t len = 0;
      const std::size_t p = index.match_at(doc, i, sentence.end, len);
      if (p == static_cast<std::size_t>(-1)) {
        ++i;
        continue;
      }
      bool negated = false;
      const std::size_t window_start = i >= kNegationWindow ? i - kNegationWindow : 0;
      for (std::size_t k = std::max(window_start, sentence.begin); k < i; ++k) {
        if (lex.negations.count(doc.tokens[k])) {
          negated = true;
          break;
        }
      }
      for (const auto& [category, weight] : index.pattern_entries[p]) {
        SentimentCategory cat = category;
        if (negated && is_polarity(cat)) cat = flip_polarity(cat);
        block.counts[static_cast<std::size_t>(cat)] += weight;
        matched.emplace_back(i, cat);
      }
      i += len;
    }
    // profanity: unambiguous always counts, ambiguous only near a negative match
    for (std::size_t t = sentence.begin; t < sentence.end; ++t) {
      const auto it = profanity_kind.find(doc.tokens[t]);
      if (it == profanity_kind.end()) continue;
      if (!it->second) {
        block.counts[static_cast<std::size_t>(SentimentCategory::StrongNegative)] += 1.0;
        continue;
      }
      for (const auto& [pos, cat] : matched) {
        const std::size_t dist = pos > t ? pos - t : t - pos;
        if (dist <= kProfanityWindow && is_negative_polarity(cat)) {
          block.counts[static_cast<std::size_t>(SentimentCategory::StrongNegative)] += 1.0;
          break;
        }
      }
    }
  }

  for (const auto& [glyph, count] : doc.emoticon_counts) {
    const auto it = lex.emoticon_polarity.find(glyph);
    if (it != lex.emoticon_polarity.end()) {
      block.counts[static_cast<std::size_t>(it->second)] += static_cast<double>(count);
    }
  }

  finalize(block, static_cast<double>(doc.tokens.size()));
  return block;
}

AnalyzerBlock<kAspectCategoryCount> analyze_aspects(const ProcessedDoc& doc,
                                                    const AspectLexicon& lex) {
  AnalyzerBlock<kAspectCategoryCount> block;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    auto it = lex.entries.find(doc.tokens[i]);
    if (it == lex.entries.end()) it = lex.entries.find(doc.lemmas[i]);
    if (it != lex.entries.end()) {
      block.counts[static_cast<std::size_t>(it->second)] += 1.0;
    }
  }
  finalize(block, static_cast<double>(doc.tokens.size()));
  return block;
}

namespace {

std::uint16_t tag_token(const std::string& token, const std::string& lemma,
                        const GrammarRuleSet& rules) {
  if (auto it = rules.pos_lexicon.find(token); it != rules.pos_lexicon.end()) return it->second;
  if (auto it = rules.pos_lexicon.find(lemma); it != rules.pos_lexicon.end()) return it->second;
  if (token.size() > 2 && token.compare(token.size() - 2, 2, "ly") == 0) return pos::Adverb;
  if (token.size() > 3 && token.compare(token.size() - 2, 2, "ed") == 0) {
    return pos::Verb | pos::PastParticiple;
  }
  if (token.size() > 4 && token.compare(token.size() - 3, 3, "ing") == 0) {
    return pos::Verb | pos::Noun;
  }
  for (const char* suffix : {"tion", "ness", "ment", "ity", "ship"}) {
    const std::size_t n = std::strlen(suffix);
    if (token.size() > n + 1 && token.compare(token.size() - n, n, suffix) == 0) {
      return pos::Noun;
    }
  }
  return pos::Noun;  // unknown content word
}

bool has(std::uint16_t tags, std::uint16_t bit) { return (tags & bit) != 0; }

bool is_np_head(std::uint16_t tags) { return has(tags, pos::Noun) || has(tags, pos::Pronoun); }

}  // namespace

AnalyzerBlock<kSyntacticTermCount> analyze_grammar(const ProcessedDoc& doc,
                                                   const GrammarRuleSet& rules) {
  AnalyzerBlock<kSyntacticTermCount> block;
  auto bump = [&](SyntacticTerm term) { block.counts[static_cast<std::size_t>(term)] += 1.0; };

  for (const auto& sentence : doc.sentences) {
    const std::size_t n = sentence.end - sentence.begin;
    std::vector<std::uint16_t> tags(n);
    for (std::size_t k = 0; k < n; ++k) {
      tags[k] = tag_token(doc.tokens[sentence.begin + k], doc.lemmas[sentence.begin + k], rules);
    }

    // main-verb classification; pattern order fixes the priority
    // (passive > copula > active with the shipped rules)
    std::ptrdiff_t main_verb = -1;
    SyntacticTerm main_kind = SyntacticTerm::MainVerbActive;
    std::ptrdiff_t complement = -1;
    for (const auto& pattern : rules.patterns) {
      if (pattern.sequence.empty()) continue;
      for (std::size_t k = 0; k < n && main_verb < 0; ++k) {
        if (!has(tags[k], pattern.sequence.front())) continue;
        // match remaining sequence elements, skipping adverbs between them
        std::size_t at = k;
        bool ok = true;
        for (std::size_t s = 1; s < pattern.sequence.size(); ++s) {
          std::size_t next = at + 1;
          while (next < n && has(tags[next], pos::Adverb) && !has(tags[next], pattern.sequence[s])) {
            ++next;
          }
          if (next >= n || !has(tags[next], pattern.sequence[s])) {
            ok = false;
            break;
          }
          at = next;
        }
        if (!ok) continue;
        // a copula complement must not be a passive participle
        if (pattern.term == SyntacticTerm::MainVerbCopula && has(tags[at], pos::PastParticiple)) {
          continue;
        }
        if (pattern.term == SyntacticTerm::MainVerbActive &&
            (has(tags[k], pos::Be) || (has(tags[k], pos::PastParticiple) && !has(tags[k], pos::Verb)))) {
          continue;
        }
        main_verb = static_cast<std::ptrdiff_t>(k);
        main_kind = pattern.term;
        complement = pattern.sequence.size() > 1 ? static_cast<std::ptrdiff_t>(at) : -1;
      }
      if (main_verb >= 0) break;
    }
    if (main_verb < 0) continue;
    bump(main_kind);

    for (std::ptrdiff_t k = 0; k < main_verb; ++k) {
      if (is_np_head(tags[static_cast<std::size_t>(k)])) {
        bump(SyntacticTerm::Subject);
        break;
      }
    }

    if (main_kind == SyntacticTerm::MainVerbCopula && complement >= 0) {
      bump(SyntacticTerm::Predicate);
      bump(SyntacticTerm::PredicateSubject);  // head of the post-copula phrase
    }

    if (main_kind == SyntacticTerm::MainVerbActive) {
      std::ptrdiff_t direct_object = -1;
      for (std::size_t k = static_cast<std::size_t>(main_verb) + 1; k < n; ++k) {
        if (has(tags[k], pos::Preposition)) break;
        if (is_np_head(tags[k])) {
          direct_object = static_cast<std::ptrdiff_t>(k);
          break;
        }
      }
      if (direct_object >= 0) {
        bump(SyntacticTerm::DirectObject);
        for (std::size_t k = static_cast<std::size_t>(direct_object) + 1; k + 1 < n; ++k) {
          const std::string& tok = doc.tokens[sentence.begin + k];
          if ((tok == "to" || tok == "for")) {
            for (std::size_t m = k + 1; m < n; ++m) {
              if (is_np_head(tags[m])) {
                bump(SyntacticTerm::IndirectObject);
                break;
              }
              if (!has(tags[m], pos::Determiner) && !has(tags[m], pos::Adjective)) break;
            }
            break;
          }
        }
      }
    }
  }

  finalize(block, static_cast<double>(doc.sentences.size()));
  return block;
}

HandcraftedFeatures analyze_all(const ProcessedDoc& doc, const LexiconBundle& lexicons) {
  HandcraftedFeatures f;
  f.sentiment = analyze_sentiment(doc, lexicons.sentiment).normalized;
  f.aspects = analyze_aspects(doc, lexicons.aspects).normalized;
  f.grammar = analyze_grammar(doc, lexicons.grammar).normalized;
  return f;
}

OccurrenceTable occurrence_table(const std::vector<std::vector<double>>& category_mass,
                                 const std::vector<DichotomyLabels>& labels,
                                 const std::vector<std::string>& row_names) {
  if (category_mass.size() != labels.size()) {
    throw InvalidArgument("occurrence_table: rows and labels differ in length");
  }
  const std::size_t n_cat = row_names.size();
  OccurrenceTable table;
  table.row_names = row_names;
  table.cells.assign(n_cat, {});

  for (std::size_t c = 0; c < n_cat; ++c) {
    std::array<double, 8> letter_mass{};
    double total = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      const double mass = category_mass[r].at(c);
      total += mass;
      const DichotomyLabels& lab = labels[r];
      letter_mass[lab.ie ? 0 : 1] += mass;
      letter_mass[lab.ns ? 2 : 3] += mass;
      letter_mass[lab.ft ? 5 : 4] += mass;  // columns ordered T, F
      letter_mass[lab.jp ? 6 : 7] += mass;
    }
    if (total <= 0.0) {
      table.warnings.push_back("category `" + row_names[c] + "` has no occurrences");
      continue;
    }
    for (std::size_t l = 0; l < 8; ++l) {
      table.cells[c][l] = 100.0 * letter_mass[l] / (4.0 * total);
    }
  }
  return table;
}

std::string occurrence_table_to_csv(const OccurrenceTable& table, const std::string& corner_label) {
  std::string out = corner_label;
  for (char letter : kOccurrenceLetters) {
    out.push_back(',');
    out.push_back(letter);
  }
  out.push_back('\n');
  char buf[32];
  for (std::size_t r = 0; r < table.row_names.size(); ++r) {
    out += table.row_names[r];
    for (double cell : table.cells[r]) {
      std::snprintf(buf, sizeof buf, ",%.2f", cell);
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace mbti
