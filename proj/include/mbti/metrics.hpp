#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mbti/util/error.hpp"

namespace mbti {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  int positive_label = 1;

  std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int positive_label = 1);

// Zero denominators yield 0 by convention.
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred);
double f1_binary(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                 int positive_label = 1);
double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred);
double f1_micro(const std::vector<int>& y_true, const std::vector<int>& y_pred);
double f1_weighted(const std::vector<int>& y_true, const std::vector<int>& y_pred);

// Over positive-label index sets; both sets empty -> 1.
double jaccard(const std::vector<int>& y_true, const std::vector<int>& y_pred,
               int positive_label = 1);

// Mean negative log-likelihood, probabilities clamped to [eps, 1-eps].
double log_loss(const std::vector<int>& y_true, const std::vector<double>& p,
                double eps = 1e-15);

// Normalized Mann-Whitney concordance (ties count 1/2); errors when only
// one label is present.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

// The ten report metrics, in fixed row order.
struct MetricsReport {
  double accuracy = 0;
  double f1_macro = 0;
  double f1_micro = 0;
  double f1_weighted = 0;
  double f1_binary = 0;
  double jaccard = 0;
  double log_loss = 0;
  double precision = 0;
  double recall = 0;
  double roc_auc = 0;

  std::array<double, 10> values() const;
};

const std::array<std::string, 10>& metric_names();      // snake_case ids
const std::array<std::string, 10>& metric_row_labels(); // report row labels

MetricsReport full_report(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::vector<double>& probabilities, int positive_label = 1);

// Named scorers for model selection; log_loss is negated so that greater is
// always better.
double score_predictions(const std::string& metric, const std::vector<int>& y_true,
                         const std::vector<int>& y_pred, const std::vector<double>& p);
bool is_known_scorer(const std::string& metric);

struct LearningCurve {
  std::vector<std::size_t> train_sizes;
  std::vector<double> train_scores;       // mean over folds
  std::vector<double> validation_scores;  // mean over folds
};

}  // namespace mbti

#include "mbti/models.hpp"

namespace mbti {

// Stratified subsampling of each fold's training side at the given
// fractions; scores are fold-mean accuracy.
LearningCurve learning_curve(const ModelSpec& spec, const FeatureMatrix& X,
                             const std::vector<int>& y, const std::vector<double>& sizes,
                             std::size_t k, std::uint64_t seed);

}  // namespace mbti
