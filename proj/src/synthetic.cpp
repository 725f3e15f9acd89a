#include "mbti/synthetic.hpp"

#include <array>

#include "mbti/util/csv.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

namespace {

const char* kIntrovertTopics[] = {"book",    "library", "novel",  "journal", "sketch",
                                  "reading", "garden",  "puzzle", "piano",   "tea"};
const char* kExtrovertTopics[] = {"party",   "concert", "crowd",  "festival", "karaoke",
                                  "meetup",  "dancing", "stage",  "team",     "barbecue"};
const char* kSharedNouns[] = {"box",   "plan",  "paper", "report", "photo",
                              "table", "house", "trip",  "letter", "song"};
const char* kFlatVerbs[] = {"put", "set", "cut", "hit", "read"};  // past == participle
const char* kWeakPositive[] = {"good", "nice", "fine", "decent", "pleasant"};
const char* kStrongPositive[] = {"great", "excellent", "amazing", "wonderful", "fantastic"};
const char* kAspectWords[] = {"store",  "price",      "amazon",  "university", "school",
                              "movie",  "television", "game",    "kitchen",    "river",
                              "market", "government", "country", "city",       "lake"};
const char* kFillers[] = {"i think about this every day",
                          "that reminds me of last week",
                          "maybe someone here knows more",
                          "it has been a long month",
                          "my schedule keeps changing",
                          "the weather turned cold again",
                          "i saw a thread about this",
                          "people keep asking me why",
                          "this forum moves fast sometimes",
                          "honestly i lost track of time"};
const char* kRequests[] = {"please help me with this", "can you explain the idea",
                           "please fix the old link", "could someone share the source"};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&pool)[N]) {
  return pool[rng.below(N)];
}

std::string topic_sentence(Rng& rng, bool introvert) {
  // letter-matched vocabulary three times out of four
  const bool match = rng.uniform() < 0.75;
  const char* topic = (match == introvert) ? pick(rng, kIntrovertTopics)
                                           : pick(rng, kExtrovertTopics);
  switch (rng.below(3)) {
    case 0: return std::string("my ") + topic + " kept me busy all weekend";
    case 1: return std::string("we talked about the ") + topic + " for hours";
    default: return std::string("i spent the evening with the ") + topic;
  }
}

std::string structure_sentence(Rng& rng, bool intuitive) {
  const bool active = rng.uniform() < 0.5 ? intuitive : (rng.uniform() < 0.8) == intuitive;
  const char* verb = pick(rng, kFlatVerbs);
  const char* noun = pick(rng, kSharedNouns);
  if (active) {
    return rng.below(2) == 0 ? std::string("i ") + verb + " the " + noun + " away"
                             : std::string("we ") + verb + " the " + noun + " together";
  }
  return rng.below(2) == 0 ? std::string("the ") + noun + " was " + verb + " away"
                           : std::string("the " ) + noun + " was " + verb + " by us";
}

std::string sentiment_sentence(Rng& rng, bool feeling) {
  const bool strong = rng.below(3) == 0;
  const char* word = strong ? pick(rng, kStrongPositive) : pick(rng, kWeakPositive);
  // the same vocabulary for both letters; only negation and emoticons differ
  const bool affirm = rng.uniform() < 0.75 ? feeling : !feeling;
  std::string s;
  switch (rng.below(3)) {
    case 0: s = std::string("it is ") + (affirm ? "" : "not ") + word; break;
    case 1: s = std::string("the day was ") + (affirm ? "" : "never ") + word; break;
    default: s = std::string("that felt ") + (affirm ? "really " : "not really ") + word;
  }
  if (rng.uniform() < 0.35) {
    if (affirm) {
      s += rng.below(2) == 0 ? " :)" : " \xF0\x9F\x98\x8A";  // 😊
    } else {
      s += rng.below(2) == 0 ? " :(" : " \xF0\x9F\x98\x9E";  // 😞
    }
  }
  return s;
}

std::string aspect_sentence(Rng& rng) {
  const char* word = pick(rng, kAspectWords);
  return rng.below(2) == 0 ? std::string("the ") + word + " near us changed a lot"
                           : std::string("someone mentioned the ") + word + " yesterday";
}

std::string noise_fragment(Rng& rng) {
  switch (rng.below(5)) {
    case 0: return "check https://example.com/thread now";
    case 1: return "that was soooooo strange";
    case 2: return "i am infp btw";
    case 3: return pick(rng, kRequests);
    default: return "it is broken, not working at all";
  }
}

std::string make_post(Rng& rng, const DichotomyLabels& labels) {
  const std::size_t n_sentences = 2 + rng.below(3);
  std::string post;
  for (std::size_t s = 0; s < n_sentences; ++s) {
    if (!post.empty()) post += " ";
    switch (rng.below(5)) {
      case 0: post += topic_sentence(rng, labels.ie); break;
      case 1: post += structure_sentence(rng, labels.ns); break;
      case 2: post += sentiment_sentence(rng, labels.ft); break;
      case 3: post += aspect_sentence(rng); break;
      default: post += pick(rng, kFillers);
    }
    post += ".";
  }
  if (rng.uniform() < 0.10) post += " " + noise_fragment(rng) + ".";
  return post;
}

std::string sample_type(Rng& rng) {
  // skewed toward the dominant introverted-intuitive codes
  static const std::pair<const char*, double> dist[] = {
      {"INFP", 0.210}, {"INFJ", 0.170}, {"INTP", 0.150}, {"INTJ", 0.125},
      {"ENFP", 0.055}, {"ENTP", 0.045}, {"ISTP", 0.030}, {"ISFP", 0.030},
      {"ENFJ", 0.028}, {"ISTJ", 0.028}, {"ENTJ", 0.026}, {"ISFJ", 0.026},
      {"ESTP", 0.022}, {"ESFP", 0.021}, {"ESFJ", 0.018}, {"ESTJ", 0.016}};
  double u = rng.uniform();
  for (const auto& [code, p] : dist) {
    if (u < p) return code;
    u -= p;
  }
  return "ESTJ";
}

}  // namespace

namespace {

std::vector<std::pair<std::string, std::string>> make_rows(const SyntheticConfig& config) {
  Rng rng(derive_seed(config.seed, "synthetic"));
  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(config.n_records);
  for (std::size_t r = 0; r < config.n_records; ++r) {
    const std::string code = sample_type(rng);
    const DichotomyLabels labels = decompose_labels(code);
    const std::size_t n_posts = 8 + rng.below(5);
    std::string posts;
    for (std::size_t p = 0; p < n_posts; ++p) {
      if (p) posts += "|||";
      posts += make_post(rng, labels);
    }
    rows.emplace_back(code, posts);
  }
  return rows;
}

}  // namespace

std::string synthetic_corpus_csv(const SyntheticConfig& config) {
  std::string csv = "type,posts\n";
  for (const auto& [code, posts] : make_rows(config)) {
    csv += csv_join({code, posts}) + "\n";
  }
  return csv;
}

Corpus make_synthetic_corpus(const SyntheticConfig& config) {
  return corpus_from_rows(make_rows(config), "|||",
                          "synthetic://seed-" + std::to_string(config.seed));
}

}  // namespace mbti
