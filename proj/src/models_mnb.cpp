#include <algorithm>
#include <cmath>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "models_internal.hpp"

namespace mbti {

namespace {

double shifted_dense(const MnbModel& m, double value, std::size_t dense_col) {
  return std::max(0.0, value - m.dense_shift[dense_col]);
}

}  // namespace

TrainedModel fit_mnb(const FeatureMatrix& X, const std::vector<int>& y, double alpha,
                     std::uint64_t seed) {
  if (!(alpha > 0.0)) throw InvalidArgument("fit_mnb: alpha must be > 0");
  ops::check_binary_labels(y, X.rows(), "fit_mnb");
  for (double v : X.values) {
    if (v < 0.0) throw InvalidArgument("fit_mnb: negative feature value in sparse block");
  }

  MnbModel m;
  m.alpha = alpha;

  // dense block shifted so training values are nonnegative
  m.dense_shift.assign(X.dense_cols, 0.0);
  for (std::size_t j = 0; j < X.dense_cols; ++j) {
    double lo = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) lo = std::min(lo, X.dense_row(r)[j]);
    m.dense_shift[j] = lo;
  }

  const std::size_t n_features = X.cols();
  std::vector<double> counts[2];
  counts[0].assign(n_features, 0.0);
  counts[1].assign(n_features, 0.0);
  std::size_t n_docs[2] = {0, 0};
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const int label = y[r];
    ++n_docs[label];
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) counts[label][idx[k]] += val[k];
    const auto d = X.dense_row(r);
    for (std::size_t j = 0; j < X.dense_cols; ++j) {
      counts[label][X.sparse_cols + j] += shifted_dense(m, d[j], j);
    }
  }

  const double n = static_cast<double>(n_features);
  for (int label = 0; label < 2; ++label) {
    double total = 0.0;
    for (double c : counts[label]) total += c;
    std::vector<double>& out = label == 0 ? m.log_theta_neg : m.log_theta_pos;
    out.resize(n_features);
    for (std::size_t i = 0; i < n_features; ++i) {
      out[i] = std::log((counts[label][i] + alpha) / (total + alpha * n));
    }
  }
  m.log_prior_neg = std::log(static_cast<double>(n_docs[0]) / static_cast<double>(X.rows()));
  m.log_prior_pos = std::log(static_cast<double>(n_docs[1]) / static_cast<double>(X.rows()));

  TrainedModel model;
  model.spec.family = ModelFamily::MNB;
  model.spec.params = {{"alpha", alpha}};
  model.spec.seed = seed;
  model.n_features = n_features;
  model.state = std::move(m);
  return model;
}

namespace detail {

std::vector<double> predict_mnb(const MnbModel& m, const FeatureMatrix& X) {
  if (X.dense_cols != m.dense_shift.size()) {
    throw InvalidArgument("predict: dense block width mismatch");
  }
  std::vector<double> probs(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    double joint_neg = m.log_prior_neg;
    double joint_pos = m.log_prior_pos;
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      joint_neg += val[k] * m.log_theta_neg[idx[k]];
      joint_pos += val[k] * m.log_theta_pos[idx[k]];
    }
    const auto d = X.dense_row(r);
    for (std::size_t j = 0; j < X.dense_cols; ++j) {
      const double v = shifted_dense(m, d[j], j);
      const std::size_t col = X.sparse_cols + j;
      joint_neg += v * m.log_theta_neg[col];
      joint_pos += v * m.log_theta_pos[col];
    }
    // normalized exponentials
    const double hi = std::max(joint_neg, joint_pos);
    const double zn = std::exp(joint_neg - hi);
    const double zp = std::exp(joint_pos - hi);
    probs[r] = zp / (zn + zp);
  }
  return probs;
}

}  // namespace detail

}  // namespace mbti
