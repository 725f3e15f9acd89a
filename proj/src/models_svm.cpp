#include <algorithm>
#include <cmath>
#include <list>
#include <unordered_map>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "mbti/util/rng.hpp"
#include "models_internal.hpp"

namespace mbti {

double rbf_gamma_scale(const FeatureMatrix& X) {
  const double n_entries = static_cast<double>(X.rows()) * static_cast<double>(X.cols());
  if (n_entries <= 0.0) return 1.0;
  double sum = 0.0, sum_sq = 0.0;
  for (double v : X.values) {
    sum += v;
    sum_sq += v * v;
  }
  for (double v : X.dense) {
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n_entries;
  const double var = sum_sq / n_entries - mean * mean;
  if (!(var > 1e-300)) return 1.0;  // constant input fallback
  return 1.0 / (static_cast<double>(X.cols()) * var);
}

namespace {

struct KernelCache {
  const FeatureMatrix& X;
  double gamma;
  std::vector<double> sq_norms;
  std::size_t capacity;  // cached rows
  std::list<std::size_t> lru;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>>
      rows;

  KernelCache(const FeatureMatrix& x, double g) : X(x), gamma(g) {
    sq_norms.resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) sq_norms[i] = ops::row_squared_norm(X, i);
    constexpr std::size_t kCacheBytes = 256ull << 20;
    capacity = std::max<std::size_t>(2, kCacheBytes / (sizeof(double) * std::max<std::size_t>(
                                                                            1, X.rows())));
  }

  double entry(std::size_t i, std::size_t j) const {
    const double d2 = sq_norms[i] + sq_norms[j] - 2.0 * ops::row_dot_row(X, i, X, j);
    return std::exp(-gamma * std::max(0.0, d2));
  }

  const std::vector<double>& row(std::size_t i) {
    auto it = rows.find(i);
    if (it != rows.end()) {
      lru.splice(lru.begin(), lru, it->second.second);
      return it->second.first;
    }
    if (rows.size() >= capacity) {
      rows.erase(lru.back());
      lru.pop_back();
    }
    std::vector<double> k_row(X.rows());
    for (std::size_t j = 0; j < X.rows(); ++j) k_row[j] = entry(i, j);
    lru.push_front(i);
    auto [ins, ok] = rows.emplace(i, std::make_pair(std::move(k_row), lru.begin()));
    return ins->second.first;
  }
};

struct SmoSolver {
  const FeatureMatrix& X;
  const std::vector<double>& y;  // +-1
  double C, tol;
  KernelCache cache;
  Rng rng;

  std::vector<double> alpha;
  std::vector<double> error;  // f(x_i) - y_i
  double b = 0.0;
  std::size_t passes = 0;
  bool converged = false;

  static constexpr double kEps = 1e-8;

  SmoSolver(const FeatureMatrix& x, const std::vector<double>& labels, double c, double gamma,
            double kkt_tol, std::uint64_t seed)
      : X(x), y(labels), C(c), tol(kkt_tol), cache(x, gamma), rng(seed) {
    alpha.assign(X.rows(), 0.0);
    error.resize(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) error[i] = -y[i];  // f = 0 initially
  }

  bool is_free(double a) const { return a > kEps && a < C - kEps; }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha[i1], a2 = alpha[i2];
    const double y1 = y[i1], y2 = y[i2];
    const double e1 = error[i1], e2 = error[i2];
    const double s = y1 * y2;
    double lo, hi;
    if (s > 0.0) {
      lo = std::max(0.0, a1 + a2 - C);
      hi = std::min(C, a1 + a2);
    } else {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(C, C + a2 - a1);
    }
    if (lo >= hi) return false;

    const double k11 = cache.entry(i1, i1);
    const double k12 = cache.entry(i1, i2);
    const double k22 = cache.entry(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;
    double a2_new;
    if (eta > 1e-12) {
      a2_new = a2 + y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // objective at the clip bounds
      const double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
      const double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
      const double l1 = a1 + s * (a2 - lo);
      const double h1 = a1 + s * (a2 - hi);
      const double psi_l = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                           s * lo * l1 * k12;
      const double psi_h = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                           s * hi * h1 * k12;
      if (psi_l < psi_h - kEps) a2_new = lo;
      else if (psi_l > psi_h + kEps) a2_new = hi;
      else a2_new = a2;
    }
    if (std::fabs(a2_new - a2) < kEps * (a2_new + a2 + kEps)) return false;

    double a1_new = a1 + s * (a2 - a2_new);
    if (a1_new < kEps) a1_new = 0.0;
    else if (a1_new > C - kEps) a1_new = C;

    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);
    const double b1 = b - (e1 + d1 * k11 + d2 * k12);
    const double b2 = b - (e2 + d1 * k12 + d2 * k22);
    double b_new;
    if (is_free(a1_new)) b_new = b1;
    else if (is_free(a2_new)) b_new = b2;
    else b_new = 0.5 * (b1 + b2);

    const auto& row1 = cache.row(i1);
    const auto& row2 = cache.row(i2);
    const double db = b_new - b;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      error[i] += d1 * row1[i] + d2 * row2[i] + db;
    }
    alpha[i1] = a1_new;
    alpha[i2] = a2_new;
    b = b_new;
    error[i1] = decision_of(i1) - y[i1];  // keep the two working rows exact
    error[i2] = decision_of(i2) - y[i2];
    return true;
  }

  double decision_of(std::size_t i) {
    const auto& k_row = cache.row(i);
    double f = b;
    for (std::size_t j = 0; j < X.rows(); ++j) {
      if (alpha[j] > 0.0) f += alpha[j] * y[j] * k_row[j];
    }
    return f;
  }

  bool violates(std::size_t i) const {
    const double r = error[i] * y[i];
    return (r < -tol && alpha[i] < C) || (r > tol && alpha[i] > 0.0);
  }

  bool examine(std::size_t i2) {
    if (!violates(i2)) return false;
    const double e2 = error[i2];

    // second-choice heuristic: max |E1 - E2| over free multipliers
    std::ptrdiff_t best = -1;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (!is_free(alpha[i])) continue;
      const double gap = std::fabs(error[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best >= 0 && take_step(static_cast<std::size_t>(best), i2)) return true;

    const std::size_t n = X.rows();
    std::size_t start = static_cast<std::size_t>(rng.below(n));
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      if (is_free(alpha[i]) && take_step(i, i2)) return true;
    }
    start = static_cast<std::size_t>(rng.below(n));
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (start + k) % n;
      if (take_step(i, i2)) return true;
    }
    return false;
  }

  void run() {
    const std::size_t max_passes = std::max<std::size_t>(10 * X.rows(), 100);
    bool examine_all = true;
    std::size_t changed = 1;
    while (passes < max_passes && (changed > 0 || examine_all)) {
      changed = 0;
      for (std::size_t i = 0; i < X.rows(); ++i) {
        if (examine_all || is_free(alpha[i])) {
          if (examine(i)) ++changed;
        }
      }
      ++passes;
      if (examine_all) {
        examine_all = false;
        if (changed == 0) {
          converged = true;
          break;
        }
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  std::size_t kkt_violation_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      if (violates(i)) ++count;
    }
    return count;
  }
};

struct PlattSigmoid {
  double a = 0.0, b = 0.0;
};

// Newton fit with backtracking on the regularized maximum-likelihood target
PlattSigmoid fit_platt_sigmoid(const std::vector<double>& decisions,
                               const std::vector<int>& labels) {
  const std::size_t n = decisions.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int label : labels) (label == 1 ? prior1 : prior0) += 1.0;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] == 1 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  auto objective = [&](double pa, double pb) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * pa + pb;
      f += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z))
                    : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };
  double fval = objective(a, b);
  constexpr double kSigma = 1e-12;
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decisions[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool accepted = false;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {a, b};
}

}  // namespace

double svm_decision_value(const SvmModel& model, const FeatureMatrix& X, std::size_t row) {
  double f = model.bias;
  const double qn = ops::row_squared_norm(X, row);
  for (std::size_t s = 0; s < model.support_vectors.rows(); ++s) {
    const double d2 = qn + ops::row_squared_norm(model.support_vectors, s) -
                      2.0 * ops::row_dot_row(X, row, model.support_vectors, s);
    f += model.dual_coef[s] * std::exp(-model.gamma * std::max(0.0, d2));
  }
  return f;
}

TrainedModel fit_svm_rbf(const FeatureMatrix& X, const std::vector<int>& y, SvmOptions options,
                         std::uint64_t seed) {
  if (!(options.C > 0.0)) throw InvalidArgument("fit_svm_rbf: C must be > 0");
  ops::check_binary_labels(y, X.rows(), "fit_svm_rbf");
  for (double v : X.values) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_svm_rbf: non-finite feature value");
  }
  for (double v : X.dense) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_svm_rbf: non-finite feature value");
  }

  const double gamma = options.gamma > 0.0 ? options.gamma : rbf_gamma_scale(X);
  std::vector<double> y_pm(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == 1 ? 1.0 : -1.0;

  // out-of-fold decision values for the probability sigmoid
  std::size_t n_pos = 0, n_neg = 0;
  for (int label : y) (label == 1 ? n_pos : n_neg) += 1;
  std::vector<double> platt_decisions(X.rows());
  std::vector<int> platt_labels = y;
  const bool can_cv = options.platt_folds >= 2 && n_pos >= options.platt_folds &&
                      n_neg >= options.platt_folds;
  if (can_cv) {
    // stratified fold deal, deterministic per seed
    std::vector<std::size_t> fold(X.rows());
    {
      Rng fold_rng(derive_seed(seed, "platt.folds"));
      std::vector<std::size_t> pos_rows, neg_rows;
      for (std::size_t i = 0; i < X.rows(); ++i) (y[i] == 1 ? pos_rows : neg_rows).push_back(i);
      std::size_t t = 0;
      for (auto* rows : {&neg_rows, &pos_rows}) {
        fold_rng.shuffle(*rows);
        for (std::size_t r : *rows) fold[r] = t++ % options.platt_folds;
      }
    }
    for (std::size_t f = 0; f < options.platt_folds; ++f) {
      std::vector<std::size_t> train_rows, held_rows;
      for (std::size_t i = 0; i < X.rows(); ++i) {
        (fold[i] == f ? held_rows : train_rows).push_back(i);
      }
      const FeatureMatrix x_train = ops::take_rows(X, train_rows);
      std::vector<double> y_train;
      y_train.reserve(train_rows.size());
      for (std::size_t r : train_rows) y_train.push_back(y_pm[r]);
      SmoSolver solver(x_train, y_train, options.C, gamma, options.kkt_tol,
                       derive_seed(derive_seed(seed, "platt.smo"), f));
      solver.run();
      SvmModel fold_model;
      std::vector<std::size_t> sv_rows;
      for (std::size_t i = 0; i < x_train.rows(); ++i) {
        if (solver.alpha[i] > 1e-12) {
          sv_rows.push_back(i);
          fold_model.dual_coef.push_back(solver.alpha[i] * y_train[i]);
        }
      }
      fold_model.support_vectors = ops::take_rows(x_train, sv_rows);
      fold_model.bias = solver.b;
      fold_model.gamma = gamma;
      const FeatureMatrix x_held = ops::take_rows(X, held_rows);
      for (std::size_t h = 0; h < held_rows.size(); ++h) {
        platt_decisions[held_rows[h]] = svm_decision_value(fold_model, x_held, h);
      }
    }
  }

  SmoSolver solver(X, y_pm, options.C, gamma, options.kkt_tol, derive_seed(seed, "smo"));
  solver.run();

  SvmModel m;
  m.C = options.C;
  m.gamma = gamma;
  m.bias = solver.b;
  m.converged = solver.converged;
  m.kkt_violations = solver.kkt_violation_count();
  m.n_passes = solver.passes;
  std::vector<std::size_t> sv_rows;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (solver.alpha[i] > 1e-12) {
      sv_rows.push_back(i);
      m.dual_coef.push_back(solver.alpha[i] * y_pm[i]);
    }
  }
  m.support_vectors = ops::take_rows(X, sv_rows);

  if (!can_cv) {
    for (std::size_t i = 0; i < X.rows(); ++i) {
      platt_decisions[i] = svm_decision_value(m, X, i);
    }
  }
  const PlattSigmoid sigmoid = fit_platt_sigmoid(platt_decisions, platt_labels);
  m.platt_a = sigmoid.a;
  m.platt_b = sigmoid.b;

  TrainedModel model;
  model.spec.family = ModelFamily::SvmRbf;
  model.spec.params = {{"C", options.C}, {"gamma", gamma}};
  model.spec.seed = seed;
  model.n_features = X.cols();
  model.state = std::move(m);
  return model;
}

namespace detail {

std::vector<double> predict_svm(const SvmModel& m, const FeatureMatrix& X) {
  std::vector<double> probs(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double f = svm_decision_value(m, X, r);
    const double z = m.platt_a * f + m.platt_b;
    // P(y=1 | f) = 1 / (1 + exp(a f + b))
    probs[r] = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  }
  return probs;
}

}  // namespace detail

}  // namespace mbti
