#include "mbti/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace mbti {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw InvalidArgument(std::string(what) + ": empty input");
}

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int positive_label) {
  check_lengths(y_true.size(), y_pred.size(), "confusion");
  ConfusionMatrix cm;
  cm.positive_label = positive_label;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == positive_label;
    const bool p = y_pred[i] == positive_label;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (t && !p) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double precision(const ConfusionMatrix& cm) {
  return safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
}

double recall(const ConfusionMatrix& cm) {
  return safe_div(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
}

double f1(const ConfusionMatrix& cm) {
  const double p = precision(cm);
  const double r = recall(cm);
  return safe_div(2.0 * p * r, p + r);
}

double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

double f1_binary(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                 int positive_label) {
  return f1(confusion(y_true, y_pred, positive_label));
}

namespace {

// distinct labels, ascending, from both vectors
std::vector<int> label_set(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> labels;
  for (const auto* v : {&a, &b}) {
    for (int x : *v) {
      if (std::find(labels.begin(), labels.end(), x) == labels.end()) labels.push_back(x);
    }
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

}  // namespace

double f1_macro(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "f1_macro");
  const auto labels = label_set(y_true, y_pred);
  double sum = 0.0;
  for (int label : labels) sum += f1(confusion(y_true, y_pred, label));
  return sum / static_cast<double>(labels.size());
}

double f1_micro(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "f1_micro");
  const auto labels = label_set(y_true, y_pred);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (int label : labels) {
    const auto cm = confusion(y_true, y_pred, label);
    tp += cm.tp;
    fp += cm.fp;
    fn += cm.fn;
  }
  const double p = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
  const double r = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
  return safe_div(2.0 * p * r, p + r);
}

double f1_weighted(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "f1_weighted");
  const auto labels = label_set(y_true, y_pred);
  double sum = 0.0;
  for (int label : labels) {
    const auto cm = confusion(y_true, y_pred, label);
    const double support = static_cast<double>(cm.tp + cm.fn);
    sum += support * f1(cm);
  }
  return sum / static_cast<double>(y_true.size());
}

double jaccard(const std::vector<int>& y_true, const std::vector<int>& y_pred,
               int positive_label) {
  const auto cm = confusion(y_true, y_pred, positive_label);
  const std::size_t inter = cm.tp;
  const std::size_t uni = cm.tp + cm.fp + cm.fn;
  if (uni == 0) return 1.0;  // both positive sets empty
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double log_loss(const std::vector<int>& y_true, const std::vector<double>& p, double eps) {
  check_lengths(y_true.size(), p.size(), "log_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double q = std::clamp(p[i], eps, 1.0 - eps);
    sum += y_true[i] == 1 ? -std::log(q) : -std::log(1.0 - q);
  }
  return sum / static_cast<double>(y_true.size());
}

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
  check_lengths(y_true.size(), scores.size(), "roc_auc");
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int y : y_true) {
    if (y == 1) ++n_pos;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InvalidArgument("roc_auc undefined: only one label present");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // rank-sum with average ranks for ties
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (y_true[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double m = static_cast<double>(n_pos);
  return (pos_rank_sum - m * (m + 1.0) / 2.0) / (m * static_cast<double>(n_neg));
}

std::array<double, 10> MetricsReport::values() const {
  return {accuracy, f1_macro, f1_micro, f1_weighted, f1_binary,
          jaccard,  log_loss, precision, recall,     roc_auc};
}

const std::array<std::string, 10>& metric_names() {
  static const std::array<std::string, 10> names = {
      "accuracy", "f1_macro", "f1_micro", "f1_weighted", "f1_binary",
      "jaccard",  "log_loss", "precision", "recall",     "roc_auc"};
  return names;
}

const std::array<std::string, 10>& metric_row_labels() {
  static const std::array<std::string, 10> labels = {
      "Accuracy",  "F1-Score Macro", "F1-Score Micro", "F1-Score Weighted", "F1-Score",
      "Jaccard Score", "Log Loss",   "Precision",      "Recall",            "ROC-AUC Score"};
  return labels;
}

MetricsReport full_report(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::vector<double>& probabilities, int positive_label) {
  MetricsReport r;
  r.accuracy = accuracy(y_true, y_pred);
  r.f1_macro = mbti::f1_macro(y_true, y_pred);
  r.f1_micro = mbti::f1_micro(y_true, y_pred);
  r.f1_weighted = mbti::f1_weighted(y_true, y_pred);
  r.f1_binary = mbti::f1_binary(y_true, y_pred, positive_label);
  r.jaccard = mbti::jaccard(y_true, y_pred, positive_label);
  r.log_loss = mbti::log_loss(y_true, probabilities);
  const auto cm = confusion(y_true, y_pred, positive_label);
  r.precision = mbti::precision(cm);
  r.recall = mbti::recall(cm);
  r.roc_auc = mbti::roc_auc(y_true, probabilities);
  return r;
}

double score_predictions(const std::string& metric, const std::vector<int>& y_true,
                         const std::vector<int>& y_pred, const std::vector<double>& p) {
  if (metric == "accuracy") return accuracy(y_true, y_pred);
  if (metric == "f1_macro") return f1_macro(y_true, y_pred);
  if (metric == "f1_micro") return f1_micro(y_true, y_pred);
  if (metric == "f1_weighted") return f1_weighted(y_true, y_pred);
  if (metric == "f1_binary") return f1_binary(y_true, y_pred);
  if (metric == "jaccard") return jaccard(y_true, y_pred);
  if (metric == "log_loss" || metric == "neg_log_loss") return -log_loss(y_true, p);
  if (metric == "precision") return precision(confusion(y_true, y_pred));
  if (metric == "recall") return recall(confusion(y_true, y_pred));
  if (metric == "roc_auc") return roc_auc(y_true, p);
  throw InvalidArgument("unknown scorer: " + metric);
}

bool is_known_scorer(const std::string& metric) {
  static const char* known[] = {"accuracy",  "f1_macro", "f1_micro", "f1_weighted",
                                "f1_binary", "jaccard",  "log_loss", "neg_log_loss",
                                "precision", "recall",   "roc_auc"};
  for (const char* k : known) {
    if (metric == k) return true;
  }
  return false;
}

}  // namespace mbti
