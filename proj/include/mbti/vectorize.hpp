#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbti/analyzers.hpp"
#include "mbti/util/error.hpp"

namespace mbti {

struct TfidfConfig {
  std::size_t max_features = 10000;
  std::size_t min_df = 2;
  bool sublinear_tf = false;

  bool operator==(const TfidfConfig&) const = default;
};

struct SparseRow {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;

  bool operator==(const SparseRow&) const = default;
};

struct TfidfModel {
  std::map<std::string, std::uint32_t> vocabulary;  // term -> dense column index
  std::vector<std::size_t> document_frequency;      // by column index
  std::vector<double> idf;                          // ln((1+n)/(1+df)) + 1
  std::size_t n_docs = 0;
  TfidfConfig config;

  bool operator==(const TfidfModel&) const = default;
};

using TermList = std::vector<std::string>;

// Vocabulary and idf from training documents only. When more than
// max_features terms survive min_df, the most frequent by corpus count are
// kept (ties resolved lexicographically).
TfidfModel fit_tfidf(const std::vector<TermList>& docs, TfidfConfig config = {});

// L2-normalized tf-idf row; out-of-vocabulary terms ignored.
SparseRow transform(const TfidfModel& model, const TermList& doc);

// ------------------------------------------------------------- assembly

enum class Experiment { Baseline, Sentiment, Aspects, Grammar, All };

const std::vector<Experiment>& all_experiments();
std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

// Flat indices (0..26) of the handcrafted columns an experiment appends.
std::vector<std::size_t> experiment_selection(Experiment e);

struct DenseScaler {
  std::vector<double> mean;
  std::vector<double> scale;  // stddev, 1.0 for constant columns

  bool operator==(const DenseScaler&) const = default;
};

DenseScaler fit_scaler(const std::vector<HandcraftedFeatures>& features,
                       const std::vector<std::size_t>& selection);

struct FeatureMatrix {
  std::size_t n_rows = 0;
  std::size_t sparse_cols = 0;
  std::vector<std::size_t> indptr;     // n_rows + 1
  std::vector<std::uint32_t> indices;  // sorted within each row
  std::vector<double> values;
  std::size_t dense_cols = 0;
  std::vector<double> dense;  // row-major, n_rows x dense_cols
  std::vector<std::string> column_names;

  std::size_t rows() const { return n_rows; }
  std::size_t cols() const { return sparse_cols + dense_cols; }

  std::span<const std::uint32_t> row_indices(std::size_t r) const {
    return {indices.data() + indptr[r], indptr[r + 1] - indptr[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values.data() + indptr[r], indptr[r + 1] - indptr[r]};
  }
  std::span<const double> dense_row(std::size_t r) const {
    return {dense.data() + r * dense_cols, dense_cols};
  }

  void to_dense_row(std::size_t r, std::vector<double>& out) const;
  bool operator==(const FeatureMatrix&) const = default;
};

// TF-IDF block plus the selected handcrafted columns standardized with the
// given (training-set) scaler.
FeatureMatrix assemble(const std::vector<SparseRow>& tfidf_rows,
                       const std::vector<HandcraftedFeatures>& handcrafted,
                       const std::vector<std::size_t>& selection, const DenseScaler& scaler,
                       const TfidfModel& tfidf);

std::vector<std::string> tfidf_column_names(const TfidfModel& model);

// Columnar container: JSON header + little-endian binary payload.
void save_feature_matrix(const FeatureMatrix& matrix, const std::vector<int>& labels,
                         const std::filesystem::path& path);
std::pair<FeatureMatrix, std::vector<int>> load_feature_matrix(const std::filesystem::path& path);

}  // namespace mbti
