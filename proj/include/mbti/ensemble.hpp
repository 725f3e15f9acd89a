#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbti/metrics.hpp"
#include "mbti/models.hpp"

namespace mbti {

struct FoldAssignment {
  std::size_t n_rows = 0;
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // per row
  std::uint64_t seed = 0;
  bool stratified = true;
};

// Deterministic partition; stratified mode keeps the label ratio within one
// row per fold. Errors when k > n or a label is rarer than k.
FoldAssignment kfold(std::size_t n, std::size_t k, const std::vector<int>& y, std::uint64_t seed,
                     bool stratified = true);

// Ordered axes: enumeration is the Cartesian product with the first axis
// outermost, which fixes the tie-breaking order.
struct HyperparameterGrid {
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

  std::size_t point_count() const;
  nlohmann::json point(std::size_t index) const;  // params object for one point
};

using GridSet = std::map<ModelFamily, HyperparameterGrid>;

HyperparameterGrid default_grid(ModelFamily family);
GridSet default_grid_set();
// {"logreg": {"C": [1,2]}, ...}; axis order follows the document
GridSet parse_grid_set(const std::string& json_text);

struct GridPointResult {
  nlohmann::json params;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  bool failed = false;
  std::string error;
};

struct GridSearchResult {
  ModelSpec best_spec;
  std::size_t best_index = 0;
  double best_score = 0.0;
  std::vector<GridPointResult> table;
  std::string scorer;
};

// Every grid point scored as the mean over k validation folds; fit failures
// are recorded and scored as worst, never fatal.
GridSearchResult grid_search(ModelFamily family, const HyperparameterGrid& grid,
                             const FeatureMatrix& X, const std::vector<int>& y, std::size_t k,
                             const std::string& scorer, std::uint64_t seed);

std::string grid_table_to_csv(ModelFamily family, const GridSearchResult& result);

struct StackedModel {
  std::vector<ModelSpec> base_specs;
  std::vector<TrainedModel> base_models;  // refit on the full training data
  TrainedModel final_estimator;           // fit on out-of-fold meta-features
  FoldAssignment folds;
  std::vector<double> oof_meta;  // row-major n x n_bases, diagnostics
};

ModelSpec default_final_spec(std::uint64_t seed = 0);

// Out-of-fold meta-features: for each base and fold, train on the other
// folds and predict the held-out rows, so no meta-feature of a row comes
// from a model that saw that row.
StackedModel fit_stacking(const std::vector<ModelSpec>& base_specs, const ModelSpec& final_spec,
                          const FeatureMatrix& X, const std::vector<int>& y, std::size_t k = 5,
                          std::uint64_t seed = 0);

std::vector<double> predict_stacking(const StackedModel& model, const FeatureMatrix& X);

void serialize_stacked(BinaryWriter& w, const StackedModel& model);
StackedModel deserialize_stacked(BinaryReader& r);

// dense-only helper used for meta-features and small fixtures
FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& rows,
                           const std::vector<std::string>& column_names = {});

}  // namespace mbti
