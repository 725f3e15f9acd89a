#include "mbti/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>

#include "json.hpp"
#include "mbti/util/io.hpp"

namespace mbti {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'';
}
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string s) {
  for (char& c : s) c = lower(c);
  return s;
}

// Decodes one UTF-8 codepoint; returns its byte length (0 on invalid input).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    cp = static_cast<char32_t>((b0 & 0x1F) << 6 | (s[i + 1] & 0x3F));
    return 2;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    cp = static_cast<char32_t>((b0 & 0x0F) << 12 | (s[i + 1] & 0x3F) << 6 | (s[i + 2] & 0x3F));
    return 3;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    cp = static_cast<char32_t>((b0 & 0x07) << 18 | (s[i + 1] & 0x3F) << 12 |
                               (s[i + 2] & 0x3F) << 6 | (s[i + 3] & 0x3F));
    return 4;
  }
  cp = 0xFFFD;
  return 0;
}

bool is_emoji_codepoint(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         cp == 0x2764 || cp == 0xFE0F || cp == 0x200D;
}

const char* kAsciiEmoticonStarts = ":;=8";
const char* kAsciiEmoticonEnds = ")(DPpOo3/\\|*$[]";

// Greedy match of an ASCII emoticon like :) ;-( =D :'( xD <3 at position i.
std::size_t match_ascii_emoticon(std::string_view s, std::size_t i, bool at_word_boundary) {
  if (i + 1 < s.size() && s[i] == '<' &&
      (s[i + 1] == '3' || (s[i + 1] == '/' && i + 2 < s.size() && s[i + 2] == '3'))) {
    return s[i + 1] == '3' ? 2 : 3;
  }
  if (at_word_boundary && (s[i] == 'x' || s[i] == 'X') && i + 1 < s.size() &&
      (s[i + 1] == 'D' || s[i + 1] == 'd')) {
    const bool closed = i + 2 >= s.size() || !is_word_char(s[i + 2]);
    if (closed) return 2;
  }
  if (!std::strchr(kAsciiEmoticonStarts, s[i])) return 0;
  std::size_t j = i + 1;
  if (j < s.size() && (s[j] == '-' || s[j] == '\'')) ++j;
  if (j < s.size() && std::strchr(kAsciiEmoticonEnds, s[j])) return j - i + 1;
  return 0;
}

enum class UnitKind { Word, Placeholder, Emoticon, Terminator };

struct Unit {
  UnitKind kind;
  std::string text;
};

bool match_placeholder(std::string_view s, std::size_t i, std::size_t& len) {
  for (const char* p : {kUrlPlaceholder, kTypePlaceholder}) {
    const std::size_t n = std::strlen(p);
    if (i + n <= s.size()) {
      bool ok = true;
      for (std::size_t k = 0; k < n; ++k) {
        if (lower(s[i + k]) != lower(p[k])) {
          ok = false;
          break;
        }
      }
      if (ok) {
        len = n;
        return true;
      }
    }
  }
  return false;
}

bool looks_like_url(std::string_view s, std::size_t i) {
  auto starts = [&](const char* prefix) {
    const std::size_t n = std::strlen(prefix);
    if (i + n > s.size()) return false;
    for (std::size_t k = 0; k < n; ++k)
      if (lower(s[i + k]) != prefix[k]) return false;
    return true;
  };
  return starts("http://") || starts("https://") || starts("www.");
}

// Splits raw text into words, placeholders, emoticons and sentence
// terminators. All other punctuation acts as a separator and is dropped.
std::vector<Unit> scan_units(std::string_view s, CleanStats* stats, bool collapse_runs) {
  std::vector<Unit> units;
  std::size_t i = 0;
  bool prev_word_char = false;
  while (i < s.size()) {
    const char c = s[i];
    std::size_t ph_len = 0;
    if (c == '<' && match_placeholder(s, i, ph_len)) {
      std::string text(s.substr(i, ph_len));
      units.push_back({UnitKind::Placeholder, std::move(text)});
      i += ph_len;
      prev_word_char = false;
      continue;
    }
    if (looks_like_url(s, i)) {
      while (i < s.size() && !is_space(s[i])) ++i;
      units.push_back({UnitKind::Placeholder, kUrlPlaceholder});
      if (stats) ++stats->urls_replaced;
      prev_word_char = false;
      continue;
    }
    if (const std::size_t n = match_ascii_emoticon(s, i, !prev_word_char); n > 0) {
      units.push_back({UnitKind::Emoticon, std::string(s.substr(i, n))});
      i += n;
      prev_word_char = false;
      continue;
    }
    if (static_cast<unsigned char>(c) >= 0x80) {
      char32_t cp = 0;
      const std::size_t n = decode_utf8(s, i, cp);
      if (n == 0) {
        ++i;
        continue;
      }
      if (is_emoji_codepoint(cp)) {
        std::string glyph(s.substr(i, n));
        i += n;
        // fold variation selectors / joiner sequences into one emoticon
        while (i < s.size() && static_cast<unsigned char>(s[i]) >= 0x80) {
          char32_t cp2 = 0;
          const std::size_t n2 = decode_utf8(s, i, cp2);
          if (n2 == 0 || !is_emoji_codepoint(cp2)) break;
          glyph.append(s.substr(i, n2));
          i += n2;
        }
        units.push_back({UnitKind::Emoticon, std::move(glyph)});
      } else {
        i += n;  // non-emoji non-ASCII: treated as separator
      }
      prev_word_char = false;
      continue;
    }
    if (is_word_char(c)) {
      std::string word;
      char run_char = 0;
      std::size_t run_len = 0;
      while (i < s.size() && is_word_char(s[i])) {
        const char w = s[i];
        if (w == '\'') {  // apostrophes dropped: don't -> dont
          ++i;
          continue;
        }
        if (w == run_char) {
          ++run_len;
        } else {
          run_char = w;
          run_len = 1;
        }
        if (collapse_runs && run_len > 3) {
          if (run_len == 4 && stats) ++stats->runs_collapsed;
        } else {
          word.push_back(w);
        }
        ++i;
      }
      if (!word.empty()) units.push_back({UnitKind::Word, std::move(word)});
      prev_word_char = true;
      continue;
    }
    if (is_terminator(c)) {
      const char first = c;
      while (i < s.size() && is_terminator(s[i])) ++i;  // run kept once
      units.push_back({UnitKind::Terminator, std::string(1, first)});
      prev_word_char = false;
      continue;
    }
    ++i;  // separator punctuation / whitespace
    prev_word_char = false;
  }
  return units;
}

bool is_type_mention(const std::string& word) {
  std::string w = to_lower(word);
  if (w.size() == 5 && w.back() == 's') w.pop_back();  // plural: "infps"
  if (w.size() != 4) return false;
  std::string upper = w;
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return is_valid_code(upper);
}

}  // namespace

std::string clean(const std::string& text, CleanStats& stats, CleanOptions options) {
  auto units = scan_units(text, &stats, /*collapse_runs=*/true);
  std::string out;
  for (auto& unit : units) {
    if (options.scrub_type_mentions && unit.kind == UnitKind::Word && is_type_mention(unit.text)) {
      unit.kind = UnitKind::Placeholder;
      unit.text = kTypePlaceholder;
      ++stats.types_scrubbed;
    }
    if (unit.kind == UnitKind::Terminator) {
      out += unit.text;  // attaches to the previous unit
      continue;
    }
    if (!out.empty() && out.back() != ' ') out.push_back(' ');
    out += unit.text;
  }
  return out;
}

std::string clean(const std::string& text, CleanOptions options) {
  CleanStats stats;
  return clean(text, stats, options);
}

Tokenized tokenize(const std::string& text) {
  Tokenized result;
  const auto units = scan_units(text, nullptr, /*collapse_runs=*/false);
  std::size_t sentence_start = 0;
  for (const auto& unit : units) {
    switch (unit.kind) {
      case UnitKind::Word:
      case UnitKind::Placeholder:
        result.tokens.push_back(to_lower(unit.text));
        break;
      case UnitKind::Emoticon:
        result.tokens.push_back(unit.text);
        break;
      case UnitKind::Terminator:
        if (result.tokens.size() > sentence_start) {
          result.sentences.push_back({sentence_start, result.tokens.size()});
          sentence_start = result.tokens.size();
        }
        break;
    }
  }
  if (result.tokens.size() > sentence_start) {
    result.sentences.push_back({sentence_start, result.tokens.size()});
  }
  return result;
}

bool is_emoticon_token(const std::string& token) {
  if (token.empty()) return false;
  if (static_cast<unsigned char>(token[0]) >= 0x80) {
    char32_t cp = 0;
    return decode_utf8(token, 0, cp) > 0 && is_emoji_codepoint(cp);
  }
  return match_ascii_emoticon(token, 0, true) == token.size();
}

StopwordList load_stopwords(const std::filesystem::path& path) {
  StopwordList list;
  list.source = path.filename().string();
  const std::string text = read_text_file(path);
  std::string word;
  auto flush = [&] {
    if (!word.empty() && word[0] != '#') list.words.insert(to_lower(word));
    word.clear();
  };
  for (char c : text) {
    if (c == '\n' || c == '\r') {
      flush();
    } else if (!is_space(c)) {
      word.push_back(c);
    }
  }
  flush();
  if (list.words.empty()) throw FormatError("stopword list is empty: " + path.string());
  return list;
}

LemmaTable load_lemma_table(const std::filesystem::path& path) {
  LemmaTable table;
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  table.version = j.value("version", "unversioned");
  for (const auto& [k, v] : j.at("exceptions").items()) {
    table.exceptions[to_lower(k)] = to_lower(v.get<std::string>());
  }
  return table;
}

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool undoubles(char c) {
  // gemination introduced by suffixing; l/s/z/f doubles are usually stem-final
  return c == 'b' || c == 'd' || c == 'g' || c == 'm' || c == 'n' || c == 'p' || c == 'r' ||
         c == 't';
}

std::string strip_participle_suffix(const std::string& t, std::size_t suffix_len) {
  std::string stem = t.substr(0, t.size() - suffix_len);
  if (stem.size() < 3) return t;
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && undoubles(stem[n - 1])) {
    stem.pop_back();  // running -> run
    return stem;
  }
  if (n >= 3 && !is_vowel(stem[n - 1]) && stem[n - 1] != 'w' && stem[n - 1] != 'x' &&
      stem[n - 1] != 'y' && is_vowel(stem[n - 2]) && !is_vowel(stem[n - 3])) {
    stem.push_back('e');  // making -> make
  }
  return stem;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string lemmatize(const std::string& token, const LemmaTable& table) {
  if (token.empty()) return token;
  if (auto it = table.exceptions.find(token); it != table.exceptions.end()) return it->second;
  if (is_emoticon_token(token) || token[0] == '<') return token;

  if (ends_with(token, "ies") && token.size() > 4) {
    return token.substr(0, token.size() - 3) + "y";  // cities -> city
  }
  if (ends_with(token, "ied") && token.size() > 4) {
    return token.substr(0, token.size() - 3) + "y";  // tried -> try
  }
  if (ends_with(token, "ing") && token.size() > 4) {
    return strip_participle_suffix(token, 3);
  }
  if (ends_with(token, "ed") && token.size() > 3) {
    return strip_participle_suffix(token, 2);
  }
  if (ends_with(token, "es") && token.size() > 3) {
    const std::string stem = token.substr(0, token.size() - 2);
    // -es after sibilants and o: watches -> watch, boxes -> box, goes -> go
    if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
        ends_with(stem, "ch") || ends_with(stem, "sh") || ends_with(stem, "o")) {
      return stem;
    }
  }
  if (ends_with(token, "s") && token.size() > 3 && !ends_with(token, "ss") &&
      !ends_with(token, "us") && !ends_with(token, "is")) {
    return token.substr(0, token.size() - 1);  // cats -> cat
  }
  return token;
}

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens,
                                   const LemmaTable& table) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lemmatize(t, table));
  return out;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const StopwordList& list) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!list.contains(t)) out.push_back(t);
  }
  return out;
}

ProcessedDoc preprocess(const PostRecord& record, const LemmaTable& lemma_table,
                        PreprocessOptions options) {
  return preprocess(record.posts, lemma_table, options);
}

ProcessedDoc preprocess(const std::vector<std::string>& posts, const LemmaTable& lemma_table,
                        PreprocessOptions options) {
  std::string full;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (i) full += " . ";  // sentence break between posts
    full += posts[i];
  }

  ProcessedDoc doc;
  std::string cleaned;
  if (options.do_clean) {
    CleanStats stats;
    CleanOptions copts;
    copts.scrub_type_mentions = options.scrub_type_mentions;
    cleaned = clean(full, stats, copts);
    doc.url_count = stats.urls_replaced;
    doc.repeated_char_runs_collapsed = stats.runs_collapsed;
  } else {
    cleaned = full;
  }

  const Tokenized tok = tokenize(cleaned);

  // Count emoticons and URL placeholders, then drop them from the stream;
  // sentence ranges are rebuilt over the surviving tokens.
  const std::string url_lower = to_lower(kUrlPlaceholder);
  std::vector<std::size_t> kept_before(tok.tokens.size() + 1, 0);
  std::vector<std::string> kept;
  kept.reserve(tok.tokens.size());
  for (std::size_t i = 0; i < tok.tokens.size(); ++i) {
    kept_before[i] = kept.size();
    const std::string& t = tok.tokens[i];
    if (is_emoticon_token(t)) {
      ++doc.emoticon_counts[t];
    } else if (t == url_lower) {
      if (!options.do_clean) ++doc.url_count;
    } else {
      kept.push_back(t);
    }
  }
  kept_before[tok.tokens.size()] = kept.size();

  for (const auto& range : tok.sentences) {
    const std::size_t b = kept_before[range.begin];
    const std::size_t e = kept_before[range.end];
    if (e > b) doc.sentences.push_back({b, e});
  }
  doc.tokens = std::move(kept);
  doc.lemmas = lemmatize(doc.tokens, lemma_table);
  return doc;
}

std::vector<std::string> tfidf_terms(const ProcessedDoc& doc, const StopwordList& stopwords,
                                     TermOptions options) {
  const std::vector<std::string>& source = options.use_lemmas ? doc.lemmas : doc.tokens;
  if (!options.remove_stopwords) return source;
  std::vector<std::string> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    // filter on the surface token so "was"/"is" are caught before lemmas fold them
    if (!stopwords.contains(doc.tokens[i]) && !stopwords.contains(source[i])) {
      out.push_back(source[i]);
    }
  }
  return out;
}

}  // namespace mbti
