#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mbti/util/error.hpp"
#include "mbti/util/io.hpp"
#include "mbti/vectorize.hpp"

namespace mbti {

enum class ModelFamily { MNB, RandomForest, LogReg, KNN, SvmRbf, MLP };

const std::vector<ModelFamily>& all_families();
std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

struct ModelSpec {
  ModelFamily family = ModelFamily::MNB;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
};

// Throws InvalidArgument on unknown keys or out-of-range values.
void validate_spec(const ModelSpec& spec);
ModelSpec default_spec(ModelFamily family, std::uint64_t seed = 0);

// --------------------------------------------------------------- fitted state

struct MnbModel {
  double log_prior_neg = 0, log_prior_pos = 0;
  std::vector<double> log_theta_neg, log_theta_pos;  // one per feature column
  std::vector<double> dense_shift;  // per dense column, applied before counting
  double alpha = 1.0;
};

enum class SplitCriterion { Gini, Entropy };
std::string criterion_name(SplitCriterion c);
SplitCriterion criterion_from_name(const std::string& name);

struct TreeNode {
  std::int32_t feature = -1;  // -1: leaf
  double threshold = 0.0;
  std::int32_t left = -1, right = -1;
  double prob_pos = 0.0;  // leaf label frequency
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  bool operator==(const DecisionTree&) const = default;
};
inline bool operator==(const TreeNode& a, const TreeNode& b) {
  return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
         a.right == b.right && a.prob_pos == b.prob_pos;
}

struct ForestModel {
  std::vector<DecisionTree> trees;
  SplitCriterion criterion = SplitCriterion::Gini;
};

enum class Penalty { L2, ElasticNet };
enum class LogRegSolver { QuasiNewton, NewtonCg };

struct LogRegModel {
  std::vector<double> weights;
  double intercept = 0.0;
  Penalty penalty = Penalty::L2;
  double C = 1.0;
  double rho = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;
};

struct KdTree;  // internal; rebuilt deterministically from the stored points

struct KnnModel {
  FeatureMatrix train;
  std::vector<int> labels;
  std::size_t k = 5;
  double p = 2.0;
  bool uses_tree = false;  // space-partitioning search when few features
  std::shared_ptr<const KdTree> tree;
};

struct SvmModel {
  FeatureMatrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;
  double platt_a = 0.0, platt_b = 0.0;
  bool converged = false;
  std::size_t kkt_violations = 0;
  std::size_t n_passes = 0;
};

struct MlpModel {
  std::vector<std::size_t> layer_widths;     // input, hidden..., 1
  std::vector<std::vector<double>> weights;  // per layer, row-major out x in
  std::vector<std::vector<double>> biases;
  std::vector<double> loss_history;
};

struct TrainedModel {
  ModelSpec spec;
  std::size_t n_features = 0;
  std::variant<MnbModel, ForestModel, LogRegModel, KnnModel, SvmModel, MlpModel> state;
};

// ------------------------------------------------------------------ training

// theta per smoothed relative frequency; negative sparse values rejected,
// dense columns min-shifted to nonnegative and clamped at zero.
TrainedModel fit_mnb(const FeatureMatrix& X, const std::vector<int>& y, double alpha,
                     std::uint64_t seed = 0);

// counts per label; throws on an all-zero vector
double impurity(const std::vector<double>& counts, SplitCriterion criterion);

// bootstrap per tree, sqrt(n_features) candidates per split, grown to purity
TrainedModel fit_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                               std::size_t n_trees, SplitCriterion criterion,
                               std::uint64_t seed);

struct LogRegOptions {
  Penalty penalty = Penalty::L2;
  double C = 1.0;
  double rho = 0.5;  // l1 share for the elastic-net penalty
  LogRegSolver solver = LogRegSolver::QuasiNewton;
  double grad_tol = 1e-6;
  std::size_t max_iter = 1000;
};

TrainedModel fit_logreg(const FeatureMatrix& X, const std::vector<int>& y,
                        LogRegOptions options = {}, std::uint64_t seed = 0);

// objective/gradient of the penalized logistic cost (smooth part only for
// the elastic net); exposed for gradient checking
struct LogRegGradient {
  double value = 0.0;
  std::vector<double> grad_w;
  double grad_c = 0.0;
};
LogRegGradient logreg_objective(const FeatureMatrix& X, const std::vector<int>& y,
                                const std::vector<double>& w, double c,
                                const LogRegOptions& options);

TrainedModel fit_knn(const FeatureMatrix& X, const std::vector<int>& y, std::size_t k,
                     double p = 2.0, std::uint64_t seed = 0);

double minkowski_distance(const std::vector<double>& a, const std::vector<double>& b, double p);

struct SvmOptions {
  double C = 1.0;
  double gamma = -1.0;  // <= 0: "scale" = 1 / (n_features * var(X))
  double kkt_tol = 1e-3;
  std::size_t platt_folds = 3;
};

TrainedModel fit_svm_rbf(const FeatureMatrix& X, const std::vector<int>& y,
                         SvmOptions options = {}, std::uint64_t seed = 0);

double svm_decision_value(const SvmModel& model, const FeatureMatrix& X, std::size_t row);
double rbf_gamma_scale(const FeatureMatrix& X);

struct MlpOptions {
  std::vector<std::size_t> hidden = {100};
  std::size_t max_iter = 500;
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::size_t batch_size = 0;  // 0: min(200, n)
  double tol = 1e-4;           // early stop on training-loss plateau
  std::size_t n_iter_no_change = 10;
};

TrainedModel fit_mlp(const FeatureMatrix& X, const std::vector<int>& y, MlpOptions options = {},
                     std::uint64_t seed = 0);

// hooks for gradient checking
MlpModel mlp_init(const std::vector<std::size_t>& layer_widths, std::uint64_t seed);
double mlp_loss(const MlpModel& net, const FeatureMatrix& X, const std::vector<int>& y);
double mlp_loss_and_gradient(const MlpModel& net, const FeatureMatrix& X,
                             const std::vector<int>& y, std::vector<std::vector<double>>& grad_w,
                             std::vector<std::vector<double>>& grad_b);

// ----------------------------------------------------------------- inference

// probability of the positive label per row; thresholding at 0.5 gives the
// hard label, 0.5 itself resolving to the negative label
std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& X);
std::vector<int> predict_label(const TrainedModel& model, const FeatureMatrix& X);
inline int label_from_probability(double p) { return p > 0.5 ? 1 : 0; }

// spec-driven dispatch (used by grid search and stacking)
TrainedModel fit_model(const ModelSpec& spec, const FeatureMatrix& X, const std::vector<int>& y);

void serialize_model(BinaryWriter& w, const TrainedModel& model);
TrainedModel deserialize_model(BinaryReader& r);

}  // namespace mbti
