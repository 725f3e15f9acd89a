#include <algorithm>
#include <cmath>
#include <queue>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "models_internal.hpp"

namespace mbti {

namespace {
constexpr std::size_t kTreeFeatureLimit = 20;  // space-partitioning search below this width
}

struct KdTree {
  struct Node {
    std::size_t axis = 0;
    double split = 0.0;
    std::int32_t left = -1, right = -1;
    std::uint32_t point = 0;  // leaf payload
    bool leaf = false;
  };
  std::vector<Node> nodes;
  std::vector<std::vector<double>> points;  // dense rows
  double p = 2.0;

  std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t begin, std::size_t end) {
    if (end - begin == 1) {
      Node leaf;
      leaf.leaf = true;
      leaf.point = idx[begin];
      nodes.push_back(leaf);
      return static_cast<std::int32_t>(nodes.size() - 1);
    }
    // widest-spread axis
    const std::size_t dims = points[idx[begin]].size();
    std::size_t axis = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < dims; ++d) {
      double lo = points[idx[begin]][d], hi = lo;
      for (std::size_t i = begin; i < end; ++i) {
        lo = std::min(lo, points[idx[i]][d]);
        hi = std::max(hi, points[idx[i]][d]);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        axis = d;
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points[a][axis] != points[b][axis] ? points[a][axis] < points[b][axis]
                                                                 : a < b;
                     });
    Node node;
    node.axis = axis;
    node.split = points[idx[mid]][axis];
    nodes.push_back(node);
    const std::int32_t id = static_cast<std::int32_t>(nodes.size() - 1);
    const std::int32_t left = build(idx, begin, mid);
    const std::int32_t right = build(idx, mid, end);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }

  // k nearest by (distance^p, index); worst element on top
  using Entry = std::pair<double, std::uint32_t>;

  void search(std::int32_t node_id, const std::vector<double>& q, std::size_t k,
              std::priority_queue<Entry>& heap) const {
    const Node& node = nodes[node_id];
    if (node.leaf) {
      double dist = 0.0;
      const auto& pt = points[node.point];
      for (std::size_t d = 0; d < q.size(); ++d) dist += std::pow(std::fabs(q[d] - pt[d]), p);
      const Entry entry{dist, node.point};
      if (heap.size() < k) {
        heap.push(entry);
      } else if (entry < heap.top()) {
        heap.pop();
        heap.push(entry);
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    const double axis_dist = std::pow(std::fabs(diff), p);
    if (heap.size() < k || axis_dist <= heap.top().first) search(far, q, k, heap);
  }
};

namespace detail {

std::shared_ptr<const KdTree> build_kd_tree(const FeatureMatrix& X, double p) {
  auto tree = std::make_shared<KdTree>();
  tree->p = p;
  tree->points.resize(X.rows());
  std::vector<double> row;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    X.to_dense_row(r, row);
    tree->points[r] = row;
  }
  std::vector<std::uint32_t> idx(X.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  tree->build(idx, 0, idx.size());
  return tree;
}

}  // namespace detail

double minkowski_distance(const std::vector<double>& a, const std::vector<double>& b, double p) {
  if (a.size() != b.size()) throw InvalidArgument("minkowski_distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::pow(std::fabs(a[i] - b[i]), p);
  return std::pow(sum, 1.0 / p);
}

TrainedModel fit_knn(const FeatureMatrix& X, const std::vector<int>& y, std::size_t k, double p,
                     std::uint64_t seed) {
  if (k < 1) throw InvalidArgument("fit_knn: k must be >= 1");
  if (k > X.rows()) {
    throw InvalidArgument("fit_knn: k=" + std::to_string(k) + " exceeds training size " +
                          std::to_string(X.rows()));
  }
  if (p < 1.0) throw InvalidArgument("fit_knn: p must be >= 1");
  ops::check_binary_labels(y, X.rows(), "fit_knn", /*require_both=*/false);

  KnnModel m;
  m.train = X;
  m.labels = y;
  m.k = k;
  m.p = p;
  m.uses_tree = X.cols() <= kTreeFeatureLimit;
  if (m.uses_tree) m.tree = detail::build_kd_tree(X, p);

  TrainedModel model;
  model.spec.family = ModelFamily::KNN;
  model.spec.params = {{"k", k}, {"p", p}};
  model.spec.seed = seed;
  model.n_features = X.cols();
  model.state = std::move(m);
  return model;
}

namespace detail {

namespace {

double vote(const KnnModel& m, std::vector<std::pair<double, std::uint32_t>>& nearest) {
  std::sort(nearest.begin(), nearest.end());
  // zero-distance neighbors take all the weight
  bool any_zero = false;
  for (const auto& [dist, idx] : nearest) {
    if (dist == 0.0) any_zero = true;
  }
  double weight_sum = 0.0, weighted_pos = 0.0;
  for (const auto& [dist_pow, idx] : nearest) {
    double w;
    if (any_zero) {
      if (dist_pow != 0.0) continue;
      w = 1.0;
    } else {
      w = 1.0 / std::pow(dist_pow, 1.0 / m.p);
    }
    weight_sum += w;
    if (m.labels[idx] == 1) weighted_pos += w;
  }
  return weighted_pos / weight_sum;
}

}  // namespace

std::vector<double> predict_knn(const KnnModel& m, const FeatureMatrix& X) {
  std::vector<double> probs(X.rows());
  std::vector<double> q;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    std::vector<std::pair<double, std::uint32_t>> nearest;  // (distance^p, train row)
    if (m.uses_tree && m.tree) {
      X.to_dense_row(r, q);
      std::priority_queue<KdTree::Entry> heap;
      m.tree->search(0, q, m.k, heap);
      while (!heap.empty()) {
        nearest.push_back(heap.top());
        heap.pop();
      }
    } else {
      std::vector<std::pair<double, std::uint32_t>> all(m.train.rows());
      for (std::size_t t = 0; t < m.train.rows(); ++t) {
        all[t] = {ops::row_minkowski_pow(X, r, m.train, t, m.p), static_cast<std::uint32_t>(t)};
      }
      std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m.k), all.end());
      all.resize(m.k);
      nearest = std::move(all);
    }
    probs[r] = vote(m, nearest);
  }
  return probs;
}

}  // namespace detail

}  // namespace mbti
