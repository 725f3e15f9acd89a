#include <algorithm>
#include <cmath>
#include <limits>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "mbti/util/rng.hpp"
#include "models_internal.hpp"

namespace mbti {

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double bce(double p, int y) {
  constexpr double eps = 1e-12;
  const double q = std::clamp(p, eps, 1.0 - eps);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

struct Workspace {
  // activations per layer (z for hidden pre-activation reuse is folded in)
  std::vector<std::vector<double>> act;   // act[0] unused for the sparse input
  std::vector<std::vector<double>> delta;

  void resize(const std::vector<std::size_t>& widths) {
    act.resize(widths.size());
    delta.resize(widths.size());
    for (std::size_t l = 1; l < widths.size(); ++l) {
      act[l].resize(widths[l]);
      delta[l].resize(widths[l]);
    }
  }
};

// forward pass for one row; returns the output probability
double forward(const MlpModel& net, const FeatureMatrix& X, std::size_t row, Workspace& ws) {
  const std::size_t n_layers = net.layer_widths.size();
  for (std::size_t l = 1; l < n_layers; ++l) {
    const std::size_t out_w = net.layer_widths[l];
    const std::size_t in_w = net.layer_widths[l - 1];
    const auto& W = net.weights[l - 1];
    const auto& bias = net.biases[l - 1];
    auto& out = ws.act[l];
    if (l == 1) {
      // sparse-aware input layer
      for (std::size_t j = 0; j < out_w; ++j) out[j] = bias[j];
      const auto idx = X.row_indices(row);
      const auto val = X.row_values(row);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double v = val[k];
        const std::size_t col = idx[k];
        for (std::size_t j = 0; j < out_w; ++j) out[j] += W[j * in_w + col] * v;
      }
      const auto d = X.dense_row(row);
      for (std::size_t k = 0; k < X.dense_cols; ++k) {
        const double v = d[k];
        const std::size_t col = X.sparse_cols + k;
        for (std::size_t j = 0; j < out_w; ++j) out[j] += W[j * in_w + col] * v;
      }
    } else {
      const auto& prev = ws.act[l - 1];
      for (std::size_t j = 0; j < out_w; ++j) {
        double z = bias[j];
        const double* w_row = &W[j * in_w];
        for (std::size_t i = 0; i < in_w; ++i) z += w_row[i] * prev[i];
        out[j] = z;
      }
    }
    if (l + 1 < n_layers) {
      for (double& z : out) z = z > 0.0 ? z : 0.0;  // ReLU on hidden layers
    }
  }
  return sigmoid(ws.act[n_layers - 1][0]);
}

// accumulates gradients for one row; scale is applied to the output delta
void backward(const MlpModel& net, const FeatureMatrix& X, std::size_t row, double p, int y,
              double scale, Workspace& ws, std::vector<std::vector<double>>& grad_w,
              std::vector<std::vector<double>>& grad_b) {
  const std::size_t n_layers = net.layer_widths.size();
  ws.delta[n_layers - 1][0] = scale * (p - static_cast<double>(y));
  for (std::size_t l = n_layers - 1; l >= 1; --l) {
    const std::size_t out_w = net.layer_widths[l];
    const std::size_t in_w = net.layer_widths[l - 1];
    const auto& delta = ws.delta[l];
    auto& gw = grad_w[l - 1];
    auto& gb = grad_b[l - 1];
    for (std::size_t j = 0; j < out_w; ++j) gb[j] += delta[j];
    if (l == 1) {
      const auto idx = X.row_indices(row);
      const auto val = X.row_values(row);
      for (std::size_t j = 0; j < out_w; ++j) {
        const double dj = delta[j];
        if (dj == 0.0) continue;
        double* gw_row = &gw[j * in_w];
        for (std::size_t k = 0; k < idx.size(); ++k) gw_row[idx[k]] += dj * val[k];
        const auto d = X.dense_row(row);
        for (std::size_t k = 0; k < X.dense_cols; ++k) {
          gw_row[X.sparse_cols + k] += dj * d[k];
        }
      }
      break;
    }
    const auto& prev = ws.act[l - 1];
    for (std::size_t j = 0; j < out_w; ++j) {
      const double dj = delta[j];
      if (dj == 0.0) continue;
      double* gw_row = &gw[j * in_w];
      for (std::size_t i = 0; i < in_w; ++i) gw_row[i] += dj * prev[i];
    }
    // propagate through ReLU
    auto& delta_prev = ws.delta[l - 1];
    const auto& W = net.weights[l - 1];
    for (std::size_t i = 0; i < in_w; ++i) {
      if (prev[i] <= 0.0) {  // ReLU gate
        delta_prev[i] = 0.0;
        continue;
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < out_w; ++j) sum += W[j * in_w + i] * delta[j];
      delta_prev[i] = sum;
    }
  }
}

}  // namespace

MlpModel mlp_init(const std::vector<std::size_t>& layer_widths, std::uint64_t seed) {
  MlpModel net;
  net.layer_widths = layer_widths;
  Rng rng(derive_seed(seed, "mlp.init"));
  for (std::size_t l = 1; l < layer_widths.size(); ++l) {
    const std::size_t out_w = layer_widths[l];
    const std::size_t in_w = layer_widths[l - 1];
    std::vector<double> W(out_w * in_w);
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_w));  // He, fan-in scaled
    for (double& w : W) w = stddev * rng.normal();
    net.weights.push_back(std::move(W));
    net.biases.emplace_back(out_w, 0.0);
  }
  return net;
}

double mlp_loss(const MlpModel& net, const FeatureMatrix& X, const std::vector<int>& y) {
  Workspace ws;
  ws.resize(net.layer_widths);
  double loss = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    loss += bce(forward(net, X, r, ws), y[r]);
  }
  return loss / static_cast<double>(X.rows());
}

double mlp_loss_and_gradient(const MlpModel& net, const FeatureMatrix& X,
                             const std::vector<int>& y, std::vector<std::vector<double>>& grad_w,
                             std::vector<std::vector<double>>& grad_b) {
  Workspace ws;
  ws.resize(net.layer_widths);
  grad_w.clear();
  grad_b.clear();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    grad_w.emplace_back(net.weights[l].size(), 0.0);
    grad_b.emplace_back(net.biases[l].size(), 0.0);
  }
  const double scale = 1.0 / static_cast<double>(X.rows());
  double loss = 0.0;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double p = forward(net, X, r, ws);
    loss += bce(p, y[r]);
    backward(net, X, r, p, y[r], scale, ws, grad_w, grad_b);
  }
  return loss * scale;
}

TrainedModel fit_mlp(const FeatureMatrix& X, const std::vector<int>& y, MlpOptions options,
                     std::uint64_t seed) {
  ops::check_binary_labels(y, X.rows(), "fit_mlp", /*require_both=*/false);
  if (options.hidden.empty()) throw InvalidArgument("fit_mlp: at least one hidden layer");
  for (double v : X.values) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_mlp: non-finite feature value");
  }
  for (double v : X.dense) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_mlp: non-finite feature value");
  }

  std::vector<std::size_t> widths;
  widths.push_back(X.cols());
  for (std::size_t h : options.hidden) widths.push_back(h);
  widths.push_back(1);
  MlpModel net = mlp_init(widths, seed);

  const std::size_t n = X.rows();
  const std::size_t batch_size =
      options.batch_size > 0 ? std::min(options.batch_size, n) : std::min<std::size_t>(200, n);

  // Adam state
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b, grad_w, grad_b;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    m_w.emplace_back(net.weights[l].size(), 0.0);
    v_w.emplace_back(net.weights[l].size(), 0.0);
    m_b.emplace_back(net.biases[l].size(), 0.0);
    v_b.emplace_back(net.biases[l].size(), 0.0);
    grad_w.emplace_back(net.weights[l].size(), 0.0);
    grad_b.emplace_back(net.biases[l].size(), 0.0);
  }
  Workspace ws;
  ws.resize(net.layer_widths);
  Rng shuffle_rng(derive_seed(seed, "mlp.shuffle"));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double t_step = 0.0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t no_improvement = 0;

  auto adam_update = [&](std::vector<double>& param, std::vector<double>& m,
                         std::vector<double>& v, const std::vector<double>& g) {
    const double bc1 = 1.0 - std::pow(options.beta1, t_step);
    const double bc2 = 1.0 - std::pow(options.beta2, t_step);
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
      param[i] -= options.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + options.adam_eps);
    }
  };

  for (std::size_t epoch = 0; epoch < options.max_iter; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < grad_w.size(); ++l) {
        std::fill(grad_w[l].begin(), grad_w[l].end(), 0.0);
        std::fill(grad_b[l].begin(), grad_b[l].end(), 0.0);
      }
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t r = order[i];
        const double p = forward(net, X, r, ws);
        batch_loss += bce(p, y[r]);
        backward(net, X, r, p, y[r], scale, ws, grad_w, grad_b);
      }
      epoch_loss += batch_loss;
      t_step += 1.0;
      for (std::size_t l = 0; l < net.weights.size(); ++l) {
        adam_update(net.weights[l], m_w[l], v_w[l], grad_w[l]);
        adam_update(net.biases[l], m_b[l], v_b[l], grad_b[l]);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw Error("fit_mlp: loss diverged to " + std::to_string(epoch_loss) + " at epoch " +
                  std::to_string(epoch + 1) + " (layers " + std::to_string(widths.size()) +
                  ", lr " + std::to_string(options.learning_rate) + ")");
    }
    net.loss_history.push_back(epoch_loss);
    if (epoch_loss > best_loss - options.tol) {
      ++no_improvement;
    } else {
      no_improvement = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (options.n_iter_no_change > 0 && no_improvement >= options.n_iter_no_change) break;
  }

  TrainedModel model;
  model.spec.family = ModelFamily::MLP;
  model.spec.params = {{"hidden", options.hidden},
                       {"max_iter", options.max_iter},
                       {"batch_size", batch_size}};
  model.spec.seed = seed;
  model.n_features = X.cols();
  model.state = std::move(net);
  return model;
}

namespace detail {

std::vector<double> predict_mlp(const MlpModel& m, const FeatureMatrix& X) {
  Workspace ws;
  ws.resize(m.layer_widths);
  std::vector<double> probs(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) probs[r] = forward(m, X, r, ws);
  return probs;
}

}  // namespace detail

}  // namespace mbti
