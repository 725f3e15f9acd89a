#include <algorithm>
#include <cmath>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "mbti/util/parallel.hpp"
#include "mbti/util/rng.hpp"
#include "models_internal.hpp"

namespace mbti {

double impurity(const std::vector<double>& counts, SplitCriterion criterion) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw InvalidArgument("impurity: negative count");
    total += c;
  }
  if (total <= 0.0) throw InvalidArgument("impurity: all counts are zero");
  if (criterion == SplitCriterion::Gini) {
    double sum_sq = 0.0;
    for (double c : counts) {
      const double p = c / total;
      sum_sq += p * p;
    }
    return 1.0 - sum_sq;
  }
  double entropy = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

namespace {

double impurity2(double neg, double pos, SplitCriterion criterion) {
  const double total = neg + pos;
  if (criterion == SplitCriterion::Gini) {
    const double pn = neg / total, pp = pos / total;
    return 1.0 - pn * pn - pp * pp;
  }
  double h = 0.0;
  for (double c : {neg, pos}) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

// column-major view of the sparse block
struct CscMatrix {
  std::vector<std::size_t> col_ptr;
  std::vector<std::uint32_t> rows;
  std::vector<double> vals;

  explicit CscMatrix(const FeatureMatrix& X) {
    col_ptr.assign(X.sparse_cols + 1, 0);
    for (std::uint32_t c : X.indices) ++col_ptr[c + 1];
    for (std::size_t j = 0; j < X.sparse_cols; ++j) col_ptr[j + 1] += col_ptr[j];
    rows.resize(X.indices.size());
    vals.resize(X.indices.size());
    std::vector<std::size_t> cursor(col_ptr.begin(), col_ptr.end() - 1);
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const auto idx = X.row_indices(r);
      const auto val = X.row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const std::size_t slot = cursor[idx[k]]++;
        rows[slot] = static_cast<std::uint32_t>(r);
        vals[slot] = val[k];
      }
    }
  }
};

struct TreeBuilder {
  const FeatureMatrix& X;
  const CscMatrix& csc;
  const std::vector<int>& y;
  SplitCriterion criterion;
  std::size_t mtry;
  Rng rng;
  DecisionTree tree;
  std::vector<std::uint32_t> samples;  // bootstrap rows, ascending with repeats

  // scratch
  std::vector<std::pair<double, int>> gathered;

  TreeBuilder(const FeatureMatrix& x, const CscMatrix& c, const std::vector<int>& labels,
              SplitCriterion crit, std::uint64_t seed)
      : X(x), csc(c), y(labels), criterion(crit), rng(seed) {
    mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(
                                        static_cast<double>(X.cols()))));
    samples.reserve(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
      samples.push_back(static_cast<std::uint32_t>(rng.below(X.rows())));
    }
    std::sort(samples.begin(), samples.end());
    build(0, samples.size());
  }

  // gathers (value, label) pairs of a sparse feature over samples[begin,end)
  void gather_sparse(std::size_t feature, std::size_t begin, std::size_t end) {
    gathered.clear();
    std::size_t p = csc.col_ptr[feature];
    const std::size_t p_end = csc.col_ptr[feature + 1];
    std::size_t s = begin;
    while (p < p_end && s < end) {
      if (csc.rows[p] < samples[s]) {
        ++p;
      } else if (csc.rows[p] > samples[s]) {
        ++s;
      } else {
        gathered.emplace_back(csc.vals[p], y[samples[s]]);
        ++s;  // bootstrap repeats of the same row each take a copy
      }
    }
  }

  void gather_dense(std::size_t dense_col, std::size_t begin, std::size_t end) {
    gathered.clear();
    for (std::size_t s = begin; s < end; ++s) {
      gathered.emplace_back(X.dense_row(samples[s])[dense_col], y[samples[s]]);
    }
  }

  struct Split {
    double gain = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
  };

  // impurity decrease over candidate thresholds in gathered (+ implicit zeros)
  void scan_feature(std::size_t feature, std::size_t zero_neg_t, std::size_t zero_pos_t,
                    double parent_imp, double total_neg, double total_pos, Split& best) {
    std::sort(gathered.begin(), gathered.end());
    const double zero_neg = static_cast<double>(zero_neg_t);
    const double zero_pos = static_cast<double>(zero_pos_t);
    const double total = total_neg + total_pos;

    // walk distinct values left to right, maintaining left-side counts
    double left_neg = 0.0, left_pos = 0.0;
    bool zeros_pending = zero_neg + zero_pos > 0.0;
    std::size_t i = 0;
    double prev_value = 0.0;
    bool have_prev = false;
    auto consider_boundary = [&](double value) {
      if (have_prev && value > prev_value && left_neg + left_pos > 0.0 &&
          left_neg + left_pos < total) {
        const double right_neg = total_neg - left_neg;
        const double right_pos = total_pos - left_pos;
        const double gain = parent_imp -
                            (left_neg + left_pos) / total * impurity2(left_neg, left_pos, criterion) -
                            (right_neg + right_pos) / total * impurity2(right_neg, right_pos, criterion);
        if (gain > best.gain + 1e-12) {
          best.gain = gain;
          best.feature = feature;
          best.threshold = 0.5 * (prev_value + value);
        }
      }
    };
    while (i < gathered.size() || zeros_pending) {
      double value;
      if (zeros_pending && (i >= gathered.size() || 0.0 <= gathered[i].first)) {
        value = 0.0;
        consider_boundary(value);
        left_neg += zero_neg;
        left_pos += zero_pos;
        zeros_pending = false;
      } else {
        value = gathered[i].first;
        consider_boundary(value);
        while (i < gathered.size() && gathered[i].first == value) {
          (gathered[i].second == 1 ? left_pos : left_neg) += 1.0;
          ++i;
        }
      }
      prev_value = value;
      have_prev = true;
    }
  }

  std::int32_t build(std::size_t begin, std::size_t end) {
    double neg = 0.0, pos = 0.0;
    for (std::size_t s = begin; s < end; ++s) (y[samples[s]] == 1 ? pos : neg) += 1.0;

    const std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].prob_pos = pos / (pos + neg);

    if (neg == 0.0 || pos == 0.0 || end - begin < 2) return node_id;  // pure leaf

    const double parent_imp = impurity2(neg, pos, criterion);
    Split best;
    for (std::size_t f : rng.sample_without_replacement(X.cols(), mtry)) {
      if (f < X.sparse_cols) {
        gather_sparse(f, begin, end);
        std::size_t zero_neg = 0, zero_pos = 0;
        {
          // zeros = node samples without an explicit entry
          std::size_t nz_neg = 0, nz_pos = 0;
          for (const auto& [v, label] : gathered) (label == 1 ? nz_pos : nz_neg) += 1;
          zero_neg = static_cast<std::size_t>(neg) - nz_neg;
          zero_pos = static_cast<std::size_t>(pos) - nz_pos;
        }
        if (gathered.empty() && (zero_neg + zero_pos) > 0) continue;  // constant zero
        scan_feature(f, zero_neg, zero_pos, parent_imp, neg, pos, best);
      } else {
        gather_dense(f - X.sparse_cols, begin, end);
        scan_feature(f, 0, 0, parent_imp, neg, pos, best);
      }
    }
    if (best.gain <= 0.0) return node_id;

    std::size_t n_left = 0;
    {
      // stable partition keeps the ascending row order on both sides
      std::vector<std::uint32_t> left_rows, right_rows;
      left_rows.reserve(end - begin);
      for (std::size_t s = begin; s < end; ++s) {
        const double v = value_at(samples[s], best.feature);
        (v <= best.threshold ? left_rows : right_rows).push_back(samples[s]);
      }
      if (left_rows.empty() || right_rows.empty()) return node_id;  // numeric guard
      n_left = left_rows.size();
      std::copy(left_rows.begin(), left_rows.end(), samples.begin() + begin);
      std::copy(right_rows.begin(), right_rows.end(), samples.begin() + begin + n_left);
    }

    tree.nodes[node_id].feature = static_cast<std::int32_t>(best.feature);
    tree.nodes[node_id].threshold = best.threshold;
    const std::int32_t left = build(begin, begin + n_left);
    tree.nodes[node_id].left = left;
    const std::int32_t right = build(begin + n_left, end);
    tree.nodes[node_id].right = right;
    return node_id;
  }

  double value_at(std::uint32_t row, std::size_t feature) const {
    if (feature >= X.sparse_cols) return X.dense_row(row)[feature - X.sparse_cols];
    const auto idx = X.row_indices(row);
    const auto val = X.row_values(row);
    const auto it = std::lower_bound(idx.begin(), idx.end(), static_cast<std::uint32_t>(feature));
    if (it != idx.end() && *it == feature) return val[it - idx.begin()];
    return 0.0;
  }
};

double tree_predict(const DecisionTree& tree, const std::vector<double>& x) {
  std::int32_t node = 0;
  while (tree.nodes[node].feature >= 0) {
    node = x[static_cast<std::size_t>(tree.nodes[node].feature)] <= tree.nodes[node].threshold
               ? tree.nodes[node].left
               : tree.nodes[node].right;
  }
  return tree.nodes[node].prob_pos;
}

}  // namespace

TrainedModel fit_random_forest(const FeatureMatrix& X, const std::vector<int>& y,
                               std::size_t n_trees, SplitCriterion criterion,
                               std::uint64_t seed) {
  if (n_trees < 1) throw InvalidArgument("fit_random_forest: n_trees must be >= 1");
  ops::check_binary_labels(y, X.rows(), "fit_random_forest", /*require_both=*/false);

  const CscMatrix csc(X);
  ForestModel forest;
  forest.criterion = criterion;
  forest.trees.resize(n_trees);
  const std::uint64_t tree_base = derive_seed(seed, "tree");
  parallel_for(n_trees, [&](std::size_t t) {
    TreeBuilder builder(X, csc, y, criterion, derive_seed(tree_base, t));
    forest.trees[t] = std::move(builder.tree);
  });

  TrainedModel model;
  model.spec.family = ModelFamily::RandomForest;
  model.spec.params = {{"n_trees", n_trees}, {"criterion", criterion_name(criterion)}};
  model.spec.seed = seed;
  model.n_features = X.cols();
  model.state = std::move(forest);
  return model;
}

namespace detail {

std::vector<double> predict_forest(const ForestModel& m, const FeatureMatrix& X) {
  std::vector<double> probs(X.rows());
  std::vector<double> row;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    X.to_dense_row(r, row);
    double sum = 0.0;
    for (const auto& tree : m.trees) sum += tree_predict(tree, row);
    probs[r] = sum / static_cast<double>(m.trees.size());
  }
  return probs;
}

}  // namespace detail

}  // namespace mbti
