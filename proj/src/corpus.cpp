#include "mbti/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mbti/util/csv.hpp"
#include "mbti/util/io.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

namespace {

const std::array<const char*, 16> kValidCodes = {
    "INFP", "INFJ", "INTP", "INTJ", "ISFP", "ISFJ", "ISTP", "ISTJ",
    "ENFP", "ENFJ", "ENTP", "ENTJ", "ESFP", "ESFJ", "ESTP", "ESTJ"};

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::vector<std::string> split_on(const std::string& text, const std::string& sep) {
  std::vector<std::string> parts;
  if (sep.empty()) {
    parts.push_back(text);
    return parts;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
  return parts;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // zero-variance convention
  return sab / std::sqrt(saa * sbb);
}

Histogram make_histogram(const std::vector<double>& values, double bin_width) {
  Histogram h;
  h.bin_width = bin_width;
  double max_v = 0;
  for (double v : values) max_v = std::max(max_v, v);
  const std::size_t bins = static_cast<std::size_t>(std::floor(max_v / bin_width)) + 1;
  h.counts.assign(bins, 0);
  for (double v : values) {
    std::size_t b = static_cast<std::size_t>(std::floor(v / bin_width));
    if (b >= bins) b = bins - 1;
    ++h.counts[b];
  }
  return h;
}

}  // namespace

std::string dichotomy_name(Dichotomy d) {
  switch (d) {
    case Dichotomy::IE: return "IE";
    case Dichotomy::NS: return "NS";
    case Dichotomy::FT: return "FT";
    case Dichotomy::JP: return "JP";
  }
  return "??";
}

Dichotomy dichotomy_from_name(const std::string& name) {
  for (Dichotomy d : kAllDichotomies)
    if (dichotomy_name(d) == name) return d;
  throw InvalidArgument("unknown dichotomy: " + name + " (expected IE, NS, FT or JP)");
}

char dichotomy_first_letter(Dichotomy d) { return dichotomy_name(d)[0]; }
char dichotomy_second_letter(Dichotomy d) { return dichotomy_name(d)[1]; }

bool DichotomyLabels::first_of(Dichotomy d) const {
  switch (d) {
    case Dichotomy::IE: return ie;
    case Dichotomy::NS: return ns;
    case Dichotomy::FT: return ft;
    case Dichotomy::JP: return jp;
  }
  return false;
}

DichotomyLabels decompose_labels(const std::string& code) {
  if (code.size() != 4) throw CorpusError("invalid MBTI code: \"" + code + "\"");
  DichotomyLabels labels;
  const auto check = [&](char c, char first, char second, bool& flag, int pos) {
    if (c == first) {
      flag = true;
    } else if (c == second) {
      flag = false;
    } else {
      throw CorpusError("invalid MBTI code: \"" + code + "\" (letter " +
                        std::to_string(pos + 1) + ")");
    }
  };
  check(code[0], 'I', 'E', labels.ie, 0);
  check(code[1], 'N', 'S', labels.ns, 1);
  check(code[2], 'F', 'T', labels.ft, 2);
  check(code[3], 'J', 'P', labels.jp, 3);
  return labels;
}

std::string recompose_labels(const DichotomyLabels& labels) {
  std::string code(4, '?');
  code[0] = labels.ie ? 'I' : 'E';
  code[1] = labels.ns ? 'N' : 'S';
  code[2] = labels.ft ? 'F' : 'T';
  code[3] = labels.jp ? 'J' : 'P';
  return code;
}

bool is_valid_code(const std::string& code) {
  for (const char* c : kValidCodes)
    if (code == c) return true;
  return false;
}

Corpus corpus_from_rows(const std::vector<std::pair<std::string, std::string>>& rows,
                        const std::string& separator, const std::string& source) {
  Corpus corpus;
  corpus.provenance.source_path = source;
  corpus.provenance.load_timestamp = now_iso8601();
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t row_no = 0;
  for (const auto& [code, posts_raw] : rows) {
    ++row_no;
    if (!is_valid_code(code)) {
      throw CorpusError("row " + std::to_string(row_no) + ": invalid MBTI code \"" + code + "\"");
    }
    PostRecord rec;
    rec.mbti_code = code;
    rec.labels = decompose_labels(code);
    rec.posts = split_on(posts_raw, separator);
    if (!seen.insert({code, posts_raw}).second) corpus.duplicates_found = true;
    corpus.records.push_back(std::move(rec));
  }
  if (corpus.records.empty()) throw CorpusError("empty corpus: no data rows");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const std::string& separator) {
  if (!std::filesystem::exists(path)) throw CorpusError("missing file: " + path.string());
  const std::string text = read_text_file(path);
  const auto records = parse_csv(text);
  if (records.empty()) throw CorpusError("empty corpus: " + path.string());

  const auto& header = records.front();
  int type_col = -1, posts_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "type") type_col = static_cast<int>(i);
    if (header[i] == "posts") posts_col = static_cast<int>(i);
  }
  if (type_col < 0 || posts_col < 0) {
    throw CorpusError("header must contain `type` and `posts` columns: " + path.string());
  }

  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() <= static_cast<std::size_t>(std::max(type_col, posts_col))) {
      throw CorpusError("row " + std::to_string(i) + ": expected at least " +
                        std::to_string(std::max(type_col, posts_col) + 1) + " columns");
    }
    rows.emplace_back(rec[static_cast<std::size_t>(type_col)],
                      rec[static_cast<std::size_t>(posts_col)]);
  }
  Corpus corpus = corpus_from_rows(rows, separator, path.string());
  return corpus;
}

CorpusStats compute_stats(const Corpus& corpus) {
  if (corpus.records.empty()) throw CorpusError("empty corpus");
  CorpusStats stats;
  const double n = static_cast<double>(corpus.records.size());

  std::map<std::string, std::size_t> counts;
  for (const char* c : kValidCodes) counts[c] = 0;
  for (const auto& rec : corpus.records) ++counts[rec.mbti_code];
  for (const char* c : kValidCodes) {
    stats.type_counts.emplace_back(c, counts[c]);
    stats.type_shares.emplace_back(c, static_cast<double>(counts[c]) / n);
  }

  std::array<std::vector<double>, 4> indicators;
  for (auto& v : indicators) v.reserve(corpus.records.size());
  std::vector<double> chars, words;
  chars.reserve(corpus.records.size());
  words.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) {
    indicators[0].push_back(rec.labels.ie ? 1.0 : 0.0);
    indicators[1].push_back(rec.labels.ns ? 1.0 : 0.0);
    indicators[2].push_back(rec.labels.ft ? 1.0 : 0.0);
    indicators[3].push_back(rec.labels.jp ? 1.0 : 0.0);
    std::size_t char_count = 0, word_count = 0;
    for (const auto& post : rec.posts) {
      char_count += post.size();
      bool in_word = false;
      for (char c : post) {
        const bool space = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
        if (!space && !in_word) ++word_count;
        in_word = !space;
      }
    }
    chars.push_back(static_cast<double>(char_count));
    words.push_back(static_cast<double>(word_count));
  }

  for (std::size_t d = 0; d < 4; ++d) {
    double sum = 0;
    for (double v : indicators[d]) sum += v;
    stats.first_letter_shares[d] = sum / n;
  }
  stats.char_lengths = make_histogram(chars, 1000.0);
  stats.word_lengths = make_histogram(words, 200.0);

  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      stats.pearson[a][b] = (a == b) ? 1.0 : pearson(indicators[a], indicators[b]);
    }
  }
  return stats;
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::json j;
  for (const auto& [code, share] : stats.type_shares) j["type_shares"][code] = share;
  for (std::size_t d = 0; d < 4; ++d) {
    const std::string name = dichotomy_name(kAllDichotomies[d]);
    j["dichotomy_shares"][name][std::string(1, name[0])] = stats.first_letter_shares[d];
    j["dichotomy_shares"][name][std::string(1, name[1])] = 1.0 - stats.first_letter_shares[d];
  }
  j["length_histogram"]["characters"]["bin_width"] = stats.char_lengths.bin_width;
  j["length_histogram"]["characters"]["counts"] = stats.char_lengths.counts;
  j["length_histogram"]["words"]["bin_width"] = stats.word_lengths.bin_width;
  j["length_histogram"]["words"]["counts"] = stats.word_lengths.counts;
  std::vector<std::string> names;
  for (Dichotomy d : kAllDichotomies) names.push_back(dichotomy_name(d));
  j["pearson"]["order"] = names;
  for (std::size_t a = 0; a < 4; ++a) j["pearson"]["matrix"].push_back(stats.pearson[a]);
  return j.dump(2);
}

namespace {

Corpus take_rows(const Corpus& corpus, std::vector<std::size_t> keep, std::uint64_t seed) {
  std::sort(keep.begin(), keep.end());  // keep input order
  Corpus out;
  out.provenance = corpus.provenance;
  out.provenance.resample_seed = seed;
  out.provenance.resampled = true;
  out.duplicates_found = corpus.duplicates_found;
  out.records.reserve(keep.size());
  for (std::size_t idx : keep) out.records.push_back(corpus.records[idx]);
  return out;
}

}  // namespace

Corpus balance(const Corpus& corpus, Dichotomy d, std::uint64_t seed) {
  std::vector<std::size_t> first, second;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    (corpus.records[i].labels.first_of(d) ? first : second).push_back(i);
  }
  if (first.empty() || second.empty()) {
    throw CorpusError("cannot balance " + dichotomy_name(d) + ": a class is absent");
  }
  const std::size_t target = std::min(first.size(), second.size());
  Rng rng(derive_seed(seed, "balance." + dichotomy_name(d)));
  auto pick = [&](std::vector<std::size_t>& pool) {
    if (pool.size() == target) return pool;
    const auto chosen = rng.sample_without_replacement(pool.size(), target);
    std::vector<std::size_t> out;
    out.reserve(target);
    for (std::size_t c : chosen) out.push_back(pool[c]);
    return out;
  };
  std::vector<std::size_t> keep = pick(first);
  const std::vector<std::size_t> keep2 = pick(second);
  keep.insert(keep.end(), keep2.begin(), keep2.end());
  return take_rows(corpus, std::move(keep), seed);
}

Corpus balance_uniform16(const Corpus& corpus, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    by_type[corpus.records[i].mbti_code].push_back(i);
  }
  std::size_t target = corpus.records.size();
  for (const auto& [code, rows] : by_type) target = std::min(target, rows.size());
  Rng rng(derive_seed(seed, "balance.uniform16"));
  std::vector<std::size_t> keep;
  for (auto& [code, rows] : by_type) {  // std::map: deterministic order
    if (rows.size() == target) {
      keep.insert(keep.end(), rows.begin(), rows.end());
    } else {
      for (std::size_t c : rng.sample_without_replacement(rows.size(), target)) {
        keep.push_back(rows[c]);
      }
    }
  }
  return take_rows(corpus, std::move(keep), seed);
}

SplitResult split(const Corpus& corpus, double test_fraction, Dichotomy d, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw CorpusError("test fraction must be in (0,1)");
  }
  std::vector<std::size_t> first, second;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    (corpus.records[i].labels.first_of(d) ? first : second).push_back(i);
  }
  Rng rng(derive_seed(seed, "split." + dichotomy_name(d)));
  std::vector<std::size_t> train_rows, test_rows;
  for (auto* pool : {&first, &second}) {
    if (pool->empty()) throw CorpusError("class too small to stratify (absent)");
    const auto ideal = test_fraction * static_cast<double>(pool->size());
    std::size_t n_test = static_cast<std::size_t>(std::llround(ideal));
    if (n_test == 0 || n_test >= pool->size()) {
      throw CorpusError("class too small to stratify at fraction " +
                        std::to_string(test_fraction));
    }
    rng.shuffle(*pool);
    for (std::size_t i = 0; i < pool->size(); ++i) {
      (i < n_test ? test_rows : train_rows).push_back((*pool)[i]);
    }
  }
  SplitResult result;
  result.train = take_rows(corpus, std::move(train_rows), seed);
  result.test = take_rows(corpus, std::move(test_rows), seed);
  return result;
}

}  // namespace mbti
