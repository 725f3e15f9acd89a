#pragma once

#include <vector>

#include "mbti/models.hpp"

// per-family inference, dispatched by predict_proba
namespace mbti::detail {

std::vector<double> predict_mnb(const MnbModel& m, const FeatureMatrix& X);
std::vector<double> predict_forest(const ForestModel& m, const FeatureMatrix& X);
std::vector<double> predict_logreg(const LogRegModel& m, const FeatureMatrix& X);
std::vector<double> predict_knn(const KnnModel& m, const FeatureMatrix& X);
std::vector<double> predict_svm(const SvmModel& m, const FeatureMatrix& X);
std::vector<double> predict_mlp(const MlpModel& m, const FeatureMatrix& X);

std::shared_ptr<const KdTree> build_kd_tree(const FeatureMatrix& X, double p);

}  // namespace mbti::detail
