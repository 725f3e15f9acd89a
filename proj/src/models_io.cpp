#include <algorithm>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "models_internal.hpp"

namespace mbti {

std::vector<double> predict_proba(const TrainedModel& model, const FeatureMatrix& X) {
  ops::check_width(X, model.n_features, "predict_proba");
  std::vector<double> probs = std::visit(
      [&](const auto& state) -> std::vector<double> {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, MnbModel>) return detail::predict_mnb(state, X);
        else if constexpr (std::is_same_v<T, ForestModel>) return detail::predict_forest(state, X);
        else if constexpr (std::is_same_v<T, LogRegModel>) return detail::predict_logreg(state, X);
        else if constexpr (std::is_same_v<T, KnnModel>) return detail::predict_knn(state, X);
        else if constexpr (std::is_same_v<T, SvmModel>) return detail::predict_svm(state, X);
        else return detail::predict_mlp(state, X);
      },
      model.state);
  for (double& p : probs) p = std::clamp(p, 0.0, 1.0);
  return probs;
}

namespace {

void write_matrix(BinaryWriter& w, const FeatureMatrix& m) {
  w.u64(m.n_rows);
  w.u64(m.sparse_cols);
  w.u64(m.dense_cols);
  std::vector<std::uint32_t> indptr32(m.indptr.begin(), m.indptr.end());
  w.u32_vec(indptr32);
  w.u32_vec(m.indices);
  w.f64_vec(m.values);
  w.f64_vec(m.dense);
  // column names are carried by the surrounding bundle when needed
}

FeatureMatrix read_matrix(BinaryReader& r) {
  FeatureMatrix m;
  m.n_rows = r.u64();
  m.sparse_cols = r.u64();
  m.dense_cols = r.u64();
  const auto indptr32 = r.u32_vec();
  m.indptr.assign(indptr32.begin(), indptr32.end());
  m.indices = r.u32_vec();
  m.values = r.f64_vec();
  m.dense = r.f64_vec();
  return m;
}

}  // namespace

void serialize_model(BinaryWriter& w, const TrainedModel& model) {
  w.str(family_name(model.spec.family));
  w.str(model.spec.params.dump());
  w.u64(model.spec.seed);
  w.u64(model.n_features);
  std::visit(
      [&](const auto& state) {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, MnbModel>) {
          w.f64(state.log_prior_neg);
          w.f64(state.log_prior_pos);
          w.f64_vec(state.log_theta_neg);
          w.f64_vec(state.log_theta_pos);
          w.f64_vec(state.dense_shift);
          w.f64(state.alpha);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          w.u8(state.criterion == SplitCriterion::Gini ? 0 : 1);
          w.u64(state.trees.size());
          for (const auto& tree : state.trees) {
            w.u64(tree.nodes.size());
            for (const auto& node : tree.nodes) {
              w.u32(static_cast<std::uint32_t>(node.feature));
              w.f64(node.threshold);
              w.u32(static_cast<std::uint32_t>(node.left));
              w.u32(static_cast<std::uint32_t>(node.right));
              w.f64(node.prob_pos);
            }
          }
        } else if constexpr (std::is_same_v<T, LogRegModel>) {
          w.f64_vec(state.weights);
          w.f64(state.intercept);
          w.u8(state.penalty == Penalty::L2 ? 0 : 1);
          w.f64(state.C);
          w.f64(state.rho);
          w.u8(state.converged ? 1 : 0);
          w.u64(state.iterations);
          w.f64(state.objective);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          write_matrix(w, state.train);
          w.u64(state.labels.size());
          for (int y : state.labels) w.u8(static_cast<std::uint8_t>(y));
          w.u64(state.k);
          w.f64(state.p);
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          write_matrix(w, state.support_vectors);
          w.f64_vec(state.dual_coef);
          w.f64(state.bias);
          w.f64(state.gamma);
          w.f64(state.C);
          w.f64(state.platt_a);
          w.f64(state.platt_b);
          w.u8(state.converged ? 1 : 0);
          w.u64(state.kkt_violations);
          w.u64(state.n_passes);
        } else {  // MlpModel
          w.u64(state.layer_widths.size());
          for (std::size_t width : state.layer_widths) w.u64(width);
          for (const auto& layer : state.weights) w.f64_vec(layer);
          for (const auto& layer : state.biases) w.f64_vec(layer);
          w.f64_vec(state.loss_history);
        }
      },
      model.state);
}

TrainedModel deserialize_model(BinaryReader& r) {
  TrainedModel model;
  model.spec.family = family_from_name(r.str());
  model.spec.params = nlohmann::json::parse(r.str());
  model.spec.seed = r.u64();
  model.n_features = r.u64();
  switch (model.spec.family) {
    case ModelFamily::MNB: {
      MnbModel m;
      m.log_prior_neg = r.f64();
      m.log_prior_pos = r.f64();
      m.log_theta_neg = r.f64_vec();
      m.log_theta_pos = r.f64_vec();
      m.dense_shift = r.f64_vec();
      m.alpha = r.f64();
      model.state = std::move(m);
      break;
    }
    case ModelFamily::RandomForest: {
      ForestModel m;
      m.criterion = r.u8() == 0 ? SplitCriterion::Gini : SplitCriterion::Entropy;
      m.trees.resize(r.u64());
      for (auto& tree : m.trees) {
        tree.nodes.resize(r.u64());
        for (auto& node : tree.nodes) {
          node.feature = static_cast<std::int32_t>(r.u32());
          node.threshold = r.f64();
          node.left = static_cast<std::int32_t>(r.u32());
          node.right = static_cast<std::int32_t>(r.u32());
          node.prob_pos = r.f64();
        }
      }
      model.state = std::move(m);
      break;
    }
    case ModelFamily::LogReg: {
      LogRegModel m;
      m.weights = r.f64_vec();
      m.intercept = r.f64();
      m.penalty = r.u8() == 0 ? Penalty::L2 : Penalty::ElasticNet;
      m.C = r.f64();
      m.rho = r.f64();
      m.converged = r.u8() != 0;
      m.iterations = r.u64();
      m.objective = r.f64();
      model.state = std::move(m);
      break;
    }
    case ModelFamily::KNN: {
      KnnModel m;
      m.train = read_matrix(r);
      m.labels.resize(r.u64());
      for (int& y : m.labels) y = r.u8();
      m.k = r.u64();
      m.p = r.f64();
      m.uses_tree = m.train.cols() <= 20;
      if (m.uses_tree) m.tree = detail::build_kd_tree(m.train, m.p);
      model.state = std::move(m);
      break;
    }
    case ModelFamily::SvmRbf: {
      SvmModel m;
      m.support_vectors = read_matrix(r);
      m.dual_coef = r.f64_vec();
      m.bias = r.f64();
      m.gamma = r.f64();
      m.C = r.f64();
      m.platt_a = r.f64();
      m.platt_b = r.f64();
      m.converged = r.u8() != 0;
      m.kkt_violations = r.u64();
      m.n_passes = r.u64();
      model.state = std::move(m);
      break;
    }
    case ModelFamily::MLP: {
      MlpModel m;
      m.layer_widths.resize(r.u64());
      for (auto& width : m.layer_widths) width = r.u64();
      for (std::size_t l = 1; l < m.layer_widths.size(); ++l) m.weights.push_back(r.f64_vec());
      for (std::size_t l = 1; l < m.layer_widths.size(); ++l) m.biases.push_back(r.f64_vec());
      m.loss_history = r.f64_vec();
      model.state = std::move(m);
      break;
    }
  }
  return model;
}

}  // namespace mbti
