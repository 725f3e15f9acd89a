#include <algorithm>
#include <cmath>

#include "feature_ops.hpp"
#include "mbti/ensemble.hpp"
#include "mbti/metrics.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

LearningCurve learning_curve(const ModelSpec& spec, const FeatureMatrix& X,
                             const std::vector<int>& y, const std::vector<double>& sizes,
                             std::size_t k, std::uint64_t seed) {
  for (double s : sizes) {
    if (!(s > 0.0 && s <= 1.0)) throw InvalidArgument("learning_curve: sizes must be in (0,1]");
  }
  const FoldAssignment folds = kfold(X.rows(), k, y, derive_seed(seed, "lc.folds"));

  // per fold: training pool grouped by label in a shuffled order, so each
  // size is a stratified prefix
  std::vector<std::vector<std::size_t>> pool_pos(k), pool_neg(k), val_rows(k);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      if (folds.fold_of[i] == f) {
        val_rows[f].push_back(i);
      } else {
        (y[i] == 1 ? pool_pos[f] : pool_neg[f]).push_back(i);
      }
    }
  }
  for (std::size_t f = 0; f < k; ++f) {
    Rng rng(derive_seed(derive_seed(seed, "lc.shuffle"), f));
    rng.shuffle(pool_pos[f]);
    rng.shuffle(pool_neg[f]);
  }

  LearningCurve curve;
  for (double fraction : sizes) {
    double train_sum = 0.0, val_sum = 0.0;
    std::size_t reported_size = 0;
    for (std::size_t f = 0; f < k; ++f) {
      const std::size_t pool_n = pool_pos[f].size() + pool_neg[f].size();
      std::size_t n_pos = static_cast<std::size_t>(
          std::llround(fraction * static_cast<double>(pool_pos[f].size())));
      std::size_t n_neg = static_cast<std::size_t>(
          std::llround(fraction * static_cast<double>(pool_neg[f].size())));
      n_pos = std::clamp<std::size_t>(n_pos, 1, pool_pos[f].size());
      n_neg = std::clamp<std::size_t>(n_neg, 1, pool_neg[f].size());
      if (n_pos + n_neg < 2 || n_pos + n_neg > pool_n) {
        throw InvalidArgument("learning_curve: degenerate subsample at fraction " +
                              std::to_string(fraction));
      }
      std::vector<std::size_t> rows(pool_pos[f].begin(), pool_pos[f].begin() + n_pos);
      rows.insert(rows.end(), pool_neg[f].begin(), pool_neg[f].begin() + n_neg);
      std::sort(rows.begin(), rows.end());
      if (f == 0) reported_size = rows.size();

      ModelSpec fold_spec = spec;
      fold_spec.seed = derive_seed(derive_seed(seed, "lc.fit"), f);
      const FeatureMatrix x_sub = ops::take_rows(X, rows);
      std::vector<int> y_sub;
      y_sub.reserve(rows.size());
      for (std::size_t r : rows) y_sub.push_back(y[r]);
      const TrainedModel model = fit_model(fold_spec, x_sub, y_sub);

      train_sum += accuracy(y_sub, predict_label(model, x_sub));
      const FeatureMatrix x_val = ops::take_rows(X, val_rows[f]);
      std::vector<int> y_val;
      y_val.reserve(val_rows[f].size());
      for (std::size_t r : val_rows[f]) y_val.push_back(y[r]);
      val_sum += accuracy(y_val, predict_label(model, x_val));
    }
    curve.train_sizes.push_back(reported_size);
    curve.train_scores.push_back(train_sum / static_cast<double>(k));
    curve.validation_scores.push_back(val_sum / static_cast<double>(k));
  }
  return curve;
}

}  // namespace mbti
