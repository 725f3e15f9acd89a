#pragma once

#include <cstdint>
#include <string>

#include "mbti/corpus.hpp"

namespace mbti {

// Deterministic demo corpus with type-dependent writing habits:
//   I/E  -> topic vocabulary (quiet hobbies vs. social events)
//   N/S  -> active vs. passive sentence structure built from shared words
//   F/T  -> the same sentiment words affirmed vs. negated, plus emoticon
//           polarity; invisible to a stopword-filtered bag of words
//   J/P  -> no planted signal
// Type shares are skewed toward the introverted-intuitive codes.
struct SyntheticConfig {
  std::size_t n_records = 640;
  std::uint64_t seed = 42;
};

std::string synthetic_corpus_csv(const SyntheticConfig& config = {});
Corpus make_synthetic_corpus(const SyntheticConfig& config = {});

}  // namespace mbti
