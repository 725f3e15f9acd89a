#include "mbti/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"
#include "mbti/util/io.hpp"

namespace mbti {

TfidfModel fit_tfidf(const std::vector<TermList>& docs, TfidfConfig config) {
  if (docs.empty()) throw InvalidArgument("fit_tfidf: empty corpus");
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (df, total count)
  for (const auto& doc : docs) {
    std::map<std::string, std::size_t> counts;
    for (const auto& term : doc) ++counts[term];
    for (const auto& [term, c] : counts) {
      auto& [df, total] = stats[term];
      ++df;
      total += c;
    }
  }

  std::vector<std::pair<std::string, std::size_t>> kept;  // term, total count
  for (const auto& [term, s] : stats) {
    if (s.first >= config.min_df) kept.emplace_back(term, s.second);
  }
  if (kept.empty()) {
    throw InvalidArgument("fit_tfidf: vocabulary empty after min_df=" +
                          std::to_string(config.min_df) + " filtering");
  }
  if (config.max_features > 0 && kept.size() > config.max_features) {
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    kept.resize(config.max_features);
    std::sort(kept.begin(), kept.end());  // lexicographic column order
  }

  TfidfModel model;
  model.config = config;
  model.n_docs = docs.size();
  model.document_frequency.reserve(kept.size());
  model.idf.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& term = kept[i].first;
    model.vocabulary.emplace(term, static_cast<std::uint32_t>(i));
    const std::size_t df = stats[term].first;
    model.document_frequency.push_back(df);
    model.idf.push_back(std::log((1.0 + static_cast<double>(model.n_docs)) /
                                 (1.0 + static_cast<double>(df))) +
                        1.0);
  }
  return model;
}

SparseRow transform(const TfidfModel& model, const TermList& doc) {
  std::map<std::uint32_t, double> tf;
  for (const auto& term : doc) {
    const auto it = model.vocabulary.find(term);
    if (it != model.vocabulary.end()) tf[it->second] += 1.0;
  }
  SparseRow row;
  row.indices.reserve(tf.size());
  row.values.reserve(tf.size());
  double sq_sum = 0.0;
  for (const auto& [col, count] : tf) {
    const double t = model.config.sublinear_tf ? 1.0 + std::log(count) : count;
    const double v = t * model.idf[col];
    row.indices.push_back(col);
    row.values.push_back(v);
    sq_sum += v * v;
  }
  if (sq_sum > 0.0) {
    const double inv = 1.0 / std::sqrt(sq_sum);
    for (double& v : row.values) v *= inv;
  }
  return row;
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> v = {Experiment::Baseline, Experiment::Sentiment,
                                            Experiment::Aspects, Experiment::Grammar,
                                            Experiment::All};
  return v;
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Baseline: return "baseline";
    case Experiment::Sentiment: return "sentiment";
    case Experiment::Aspects: return "aspects";
    case Experiment::Grammar: return "grammar";
    case Experiment::All: return "all";
  }
  return "?";
}

Experiment experiment_from_name(const std::string& name) {
  for (Experiment e : all_experiments()) {
    if (experiment_name(e) == name) return e;
  }
  throw InvalidArgument("unknown experiment: " + name);
}

std::vector<std::size_t> experiment_selection(Experiment e) {
  std::vector<std::size_t> sel;
  const auto range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sel.push_back(i);
  };
  const std::size_t s = kSentimentCategoryCount;
  const std::size_t a = kAspectCategoryCount;
  switch (e) {
    case Experiment::Baseline: break;
    case Experiment::Sentiment: range(0, s); break;
    case Experiment::Aspects: range(s, s + a); break;
    case Experiment::Grammar: range(s + a, kHandcraftedFeatureCount); break;
    case Experiment::All: range(0, kHandcraftedFeatureCount); break;
  }
  return sel;
}

DenseScaler fit_scaler(const std::vector<HandcraftedFeatures>& features,
                       const std::vector<std::size_t>& selection) {
  DenseScaler scaler;
  const std::size_t n = features.size();
  scaler.mean.assign(selection.size(), 0.0);
  scaler.scale.assign(selection.size(), 1.0);
  if (n == 0) return scaler;
  std::vector<std::array<double, kHandcraftedFeatureCount>> flats;
  flats.reserve(n);
  for (const auto& f : features) flats.push_back(f.flat());
  for (std::size_t j = 0; j < selection.size(); ++j) {
    double sum = 0.0;
    for (const auto& flat : flats) sum += flat[selection[j]];
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (const auto& flat : flats) {
      const double d = flat[selection[j]] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    scaler.mean[j] = mean;
    scaler.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return scaler;
}

void FeatureMatrix::to_dense_row(std::size_t r, std::vector<double>& out) const {
  out.assign(cols(), 0.0);
  const auto idx = row_indices(r);
  const auto val = row_values(r);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = val[k];
  const auto d = dense_row(r);
  for (std::size_t j = 0; j < dense_cols; ++j) out[sparse_cols + j] = d[j];
}

FeatureMatrix assemble(const std::vector<SparseRow>& tfidf_rows,
                       const std::vector<HandcraftedFeatures>& handcrafted,
                       const std::vector<std::size_t>& selection, const DenseScaler& scaler,
                       const TfidfModel& tfidf) {
  if (!selection.empty() && tfidf_rows.size() != handcrafted.size()) {
    throw InvalidArgument("assemble: tf-idf rows and handcrafted rows are misaligned (" +
                          std::to_string(tfidf_rows.size()) + " vs " +
                          std::to_string(handcrafted.size()) + ")");
  }
  if (scaler.mean.size() != selection.size()) {
    throw InvalidArgument("assemble: scaler width does not match selection");
  }
  FeatureMatrix m;
  m.n_rows = tfidf_rows.size();
  m.sparse_cols = tfidf.vocabulary.size();
  m.dense_cols = selection.size();
  m.indptr.reserve(m.n_rows + 1);
  m.indptr.push_back(0);
  for (const auto& row : tfidf_rows) {
    m.indices.insert(m.indices.end(), row.indices.begin(), row.indices.end());
    m.values.insert(m.values.end(), row.values.begin(), row.values.end());
    m.indptr.push_back(m.indices.size());
  }
  m.dense.reserve(m.n_rows * m.dense_cols);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const auto flat = handcrafted.empty() ? std::array<double, kHandcraftedFeatureCount>{}
                                          : handcrafted[r].flat();
    for (std::size_t j = 0; j < selection.size(); ++j) {
      m.dense.push_back((flat[selection[j]] - scaler.mean[j]) / scaler.scale[j]);
    }
  }
  m.column_names = tfidf_column_names(tfidf);
  const auto& hc_names = handcrafted_column_names();
  for (std::size_t sel : selection) m.column_names.push_back(hc_names[sel]);
  return m;
}

std::vector<std::string> tfidf_column_names(const TfidfModel& model) {
  std::vector<std::string> names(model.vocabulary.size());
  for (const auto& [term, col] : model.vocabulary) names[col] = "tfidf:" + term;
  return names;
}

namespace {
constexpr char kMatrixMagic[9] = "MBTIFMX1";
}

void save_feature_matrix(const FeatureMatrix& matrix, const std::vector<int>& labels,
                         const std::filesystem::path& path) {
  nlohmann::json header;
  header["rows"] = matrix.n_rows;
  header["sparse_cols"] = matrix.sparse_cols;
  header["dense_cols"] = matrix.dense_cols;
  header["column_names"] = matrix.column_names;
  header["has_labels"] = !labels.empty();
  const std::string header_text = header.dump();

  BinaryWriter w;
  w.u64(header_text.size());
  for (char c : header_text) w.u8(static_cast<std::uint8_t>(c));
  std::vector<std::uint32_t> indptr32;  // rows are bounded well below 2^32 entries
  indptr32.reserve(matrix.indptr.size());
  for (std::size_t v : matrix.indptr) indptr32.push_back(static_cast<std::uint32_t>(v));
  w.u32_vec(indptr32);
  w.u32_vec(matrix.indices);
  w.f64_vec(matrix.values);
  w.f64_vec(matrix.dense);
  w.u64(labels.size());
  for (int y : labels) w.u8(static_cast<std::uint8_t>(y));

  write_text_file(path, std::string(kMatrixMagic) + w.buffer());
}

std::pair<FeatureMatrix, std::vector<int>> load_feature_matrix(
    const std::filesystem::path& path) {
  const std::string blob = read_text_file(path);
  const std::size_t magic_len = std::strlen(kMatrixMagic);
  if (blob.size() < magic_len || blob.compare(0, magic_len, kMatrixMagic) != 0) {
    throw FormatError("not a feature-matrix file: " + path.string());
  }
  BinaryReader r(std::string_view(blob).substr(magic_len));
  const std::uint64_t header_len = r.u64();
  std::string header_text;
  header_text.reserve(header_len);
  for (std::uint64_t i = 0; i < header_len; ++i) header_text.push_back(static_cast<char>(r.u8()));
  const nlohmann::json header = nlohmann::json::parse(header_text);

  FeatureMatrix m;
  m.n_rows = header.at("rows").get<std::size_t>();
  m.sparse_cols = header.at("sparse_cols").get<std::size_t>();
  m.dense_cols = header.at("dense_cols").get<std::size_t>();
  m.column_names = header.at("column_names").get<std::vector<std::string>>();
  const auto indptr32 = r.u32_vec();
  m.indptr.assign(indptr32.begin(), indptr32.end());
  m.indices = r.u32_vec();
  m.values = r.f64_vec();
  m.dense = r.f64_vec();
  const std::uint64_t n_labels = r.u64();
  std::vector<int> labels;
  labels.reserve(n_labels);
  for (std::uint64_t i = 0; i < n_labels; ++i) labels.push_back(r.u8());
  return {std::move(m), std::move(labels)};
}

}  // namespace mbti
