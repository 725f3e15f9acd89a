#include "mbti/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "feature_ops.hpp"
#include "mbti/util/csv.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

FoldAssignment kfold(std::size_t n, std::size_t k, const std::vector<int>& y, std::uint64_t seed,
                     bool stratified) {
  if (k < 2) throw InvalidArgument("kfold: k must be >= 2");
  if (k > n) throw InvalidArgument("kfold: k exceeds the number of rows");
  FoldAssignment fa;
  fa.n_rows = n;
  fa.k = k;
  fa.seed = seed;
  fa.stratified = stratified;
  fa.fold_of.assign(n, 0);
  Rng rng(derive_seed(seed, "kfold"));

  if (!stratified) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t t = 0; t < n; ++t) fa.fold_of[order[t]] = t % k;
    return fa;
  }

  if (y.size() != n) throw InvalidArgument("kfold: label vector length mismatch");
  std::vector<int> labels;
  for (int v : y) {
    if (std::find(labels.begin(), labels.end(), v) == labels.end()) labels.push_back(v);
  }
  std::sort(labels.begin(), labels.end());
  // one continuous deal across label groups keeps fold sizes within one row
  std::size_t t = 0;
  for (int label : labels) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] == label) rows.push_back(i);
    }
    if (rows.size() < k) {
      throw InvalidArgument("kfold: label " + std::to_string(label) +
                            " has fewer rows than k; cannot stratify");
    }
    rng.shuffle(rows);
    for (std::size_t r : rows) fa.fold_of[r] = t++ % k;
  }
  return fa;
}

std::size_t HyperparameterGrid::point_count() const {
  std::size_t count = 1;
  for (const auto& [name, values] : axes) count *= values.size();
  return count;
}

nlohmann::json HyperparameterGrid::point(std::size_t index) const {
  nlohmann::json params = nlohmann::json::object();
  // first axis outermost
  std::size_t divisor = point_count();
  for (const auto& [name, values] : axes) {
    divisor /= values.size();
    params[name] = values[(index / divisor) % values.size()];
  }
  return params;
}

HyperparameterGrid default_grid(ModelFamily family) {
  HyperparameterGrid grid;
  auto axis = [&](const std::string& name, std::vector<nlohmann::json> values) {
    grid.axes.emplace_back(name, std::move(values));
  };
  switch (family) {
    case ModelFamily::MNB: axis("alpha", {0.1, 0.5, 1.0}); break;
    case ModelFamily::RandomForest: axis("n_trees", {100, 200}); break;
    case ModelFamily::LogReg:
      axis("C", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
      break;
    case ModelFamily::KNN: axis("k", {3, 5, 11}); break;
    case ModelFamily::SvmRbf: axis("C", {1}); break;
    case ModelFamily::MLP: {
      axis("hidden", {nlohmann::json::array({50}), nlohmann::json::array({100}),
                      nlohmann::json::array({150})});
      axis("max_iter", {500, 1000, 1500});
      break;
    }
  }
  return grid;
}

GridSet default_grid_set() {
  GridSet set;
  for (ModelFamily f : all_families()) set[f] = default_grid(f);
  return set;
}

GridSet parse_grid_set(const std::string& json_text) {
  const auto j = nlohmann::ordered_json::parse(json_text);
  GridSet set;
  for (const auto& [family_name_str, axes] : j.items()) {
    const ModelFamily family = family_from_name(family_name_str);
    HyperparameterGrid grid;
    for (const auto& [axis_name, values] : axes.items()) {
      if (!values.is_array() || values.empty()) {
        throw InvalidArgument("grid axis `" + axis_name + "` must be a non-empty array");
      }
      std::vector<nlohmann::json> vals;
      for (const auto& v : values) vals.push_back(v);
      grid.axes.emplace_back(axis_name, std::move(vals));
    }
    // validate every point against the family schema up front
    for (std::size_t i = 0; i < grid.point_count(); ++i) {
      ModelSpec spec;
      spec.family = family;
      spec.params = grid.point(i);
      validate_spec(spec);
    }
    set[family] = std::move(grid);
  }
  return set;
}

namespace {

std::vector<int> take_labels(const std::vector<int>& y, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

GridSearchResult grid_search(ModelFamily family, const HyperparameterGrid& grid,
                             const FeatureMatrix& X, const std::vector<int>& y, std::size_t k,
                             const std::string& scorer, std::uint64_t seed) {
  if (grid.point_count() == 0) throw InvalidArgument("grid_search: empty grid");
  if (!is_known_scorer(scorer)) throw InvalidArgument("grid_search: unknown scorer " + scorer);

  const FoldAssignment folds = kfold(X.rows(), k, y, derive_seed(seed, "grid.folds"));
  // fold slices shared by every grid point
  std::vector<std::vector<std::size_t>> train_rows(k), val_rows(k);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (folds.fold_of[i] == f ? val_rows[f] : train_rows[f]).push_back(i);
    }
  }
  std::vector<FeatureMatrix> x_train(k), x_val(k);
  std::vector<std::vector<int>> y_train(k), y_val(k);
  for (std::size_t f = 0; f < k; ++f) {
    x_train[f] = ops::take_rows(X, train_rows[f]);
    x_val[f] = ops::take_rows(X, val_rows[f]);
    y_train[f] = take_labels(y, train_rows[f]);
    y_val[f] = take_labels(y, val_rows[f]);
  }

  GridSearchResult result;
  result.scorer = scorer;
  const std::uint64_t family_seed = derive_seed(seed, family_name(family));
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  bool any_ok = false;

  for (std::size_t p = 0; p < grid.point_count(); ++p) {
    GridPointResult point;
    point.params = grid.point(p);
    try {
      for (std::size_t f = 0; f < k; ++f) {
        ModelSpec spec;
        spec.family = family;
        spec.params = point.params;
        spec.seed = derive_seed(family_seed, f);  // identical seeds across points
        const TrainedModel model = fit_model(spec, x_train[f], y_train[f]);
        const auto probs = predict_proba(model, x_val[f]);
        std::vector<int> pred(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = label_from_probability(probs[i]);
        point.fold_scores.push_back(score_predictions(scorer, y_val[f], pred, probs));
      }
      double sum = 0.0;
      for (double s : point.fold_scores) sum += s;
      point.mean_score = sum / static_cast<double>(k);
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
      point.fold_scores.clear();
      point.mean_score = -std::numeric_limits<double>::infinity();
    }
    if (!point.failed && point.mean_score > best) {
      best = point.mean_score;
      best_index = p;
      any_ok = true;
    }
    result.table.push_back(std::move(point));
  }
  if (!any_ok) {
    throw Error("grid_search: every grid point failed for family " + family_name(family) +
                " (first error: " + result.table.front().error + ")");
  }
  result.best_index = best_index;
  result.best_score = best;
  result.best_spec.family = family;
  result.best_spec.params = result.table[best_index].params;
  result.best_spec.seed = derive_seed(family_seed, "best");
  return result;
}

std::string grid_table_to_csv(ModelFamily family, const GridSearchResult& result) {
  std::string out = "family,params,fold,score,mean\n";
  for (const auto& point : result.table) {
    const std::string params = point.params.dump();
    const std::string mean = point.failed ? "failed" : std::to_string(point.mean_score);
    if (point.failed) {
      out += csv_join({family_name(family), params, "-", point.error, mean}) + "\n";
      continue;
    }
    for (std::size_t f = 0; f < point.fold_scores.size(); ++f) {
      out += csv_join({family_name(family), params, std::to_string(f),
                       std::to_string(point.fold_scores[f]), mean}) +
             "\n";
    }
  }
  return out;
}

FeatureMatrix dense_matrix(const std::vector<std::vector<double>>& rows,
                           const std::vector<std::string>& column_names) {
  FeatureMatrix m;
  m.n_rows = rows.size();
  m.sparse_cols = 0;
  m.indptr.assign(rows.size() + 1, 0);
  m.dense_cols = rows.empty() ? column_names.size() : rows.front().size();
  m.dense.reserve(m.n_rows * m.dense_cols);
  for (const auto& row : rows) {
    if (row.size() != m.dense_cols) throw InvalidArgument("dense_matrix: ragged rows");
    m.dense.insert(m.dense.end(), row.begin(), row.end());
  }
  if (!column_names.empty()) {
    m.column_names = column_names;
  } else {
    for (std::size_t j = 0; j < m.dense_cols; ++j) {
      m.column_names.push_back("x" + std::to_string(j));
    }
  }
  return m;
}

ModelSpec default_final_spec(std::uint64_t seed) {
  // standard stacking head: probabilistic, convex, fast
  ModelSpec spec;
  spec.family = ModelFamily::LogReg;
  spec.params = {{"C", 1.0}, {"penalty", "l2"}, {"solver", "quasi-newton"}};
  spec.seed = seed;
  return spec;
}

StackedModel fit_stacking(const std::vector<ModelSpec>& base_specs, const ModelSpec& final_spec,
                          const FeatureMatrix& X, const std::vector<int>& y, std::size_t k,
                          std::uint64_t seed) {
  if (base_specs.size() < 2) throw InvalidArgument("fit_stacking: need at least 2 base specs");
  ops::check_binary_labels(y, X.rows(), "fit_stacking");

  StackedModel model;
  model.base_specs = base_specs;
  model.folds = kfold(X.rows(), k, y, derive_seed(seed, "stack.folds"));

  std::vector<std::vector<std::size_t>> train_rows(k), val_rows(k);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (model.folds.fold_of[i] == f ? val_rows[f] : train_rows[f]).push_back(i);
    }
  }

  const std::size_t n_bases = base_specs.size();
  model.oof_meta.assign(X.rows() * n_bases, 0.0);
  const std::uint64_t oof_seed = derive_seed(seed, "stack.oof");
  for (std::size_t b = 0; b < n_bases; ++b) {
    for (std::size_t f = 0; f < k; ++f) {
      ModelSpec spec = base_specs[b];
      spec.seed = derive_seed(oof_seed, b, f);
      try {
        const FeatureMatrix x_train = ops::take_rows(X, train_rows[f]);
        const TrainedModel fold_model = fit_model(spec, x_train, take_labels(y, train_rows[f]));
        const FeatureMatrix x_val = ops::take_rows(X, val_rows[f]);
        const auto probs = predict_proba(fold_model, x_val);
        for (std::size_t i = 0; i < val_rows[f].size(); ++i) {
          model.oof_meta[val_rows[f][i] * n_bases + b] = probs[i];
        }
      } catch (const std::exception& e) {
        throw Error("fit_stacking: base " + family_name(spec.family) + " " + spec.params.dump() +
                    " failed on fold " + std::to_string(f) + ": " + e.what());
      }
    }
  }

  // final estimator sees only out-of-fold predictions
  std::vector<std::vector<double>> meta_rows(X.rows(), std::vector<double>(n_bases));
  std::vector<std::string> meta_names;
  for (std::size_t b = 0; b < n_bases; ++b) {
    meta_names.push_back("base" + std::to_string(b) + ":" + family_name(base_specs[b].family));
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t b = 0; b < n_bases; ++b) meta_rows[i][b] = model.oof_meta[i * n_bases + b];
  }
  ModelSpec head = final_spec;
  head.seed = derive_seed(seed, "stack.final");
  model.final_estimator = fit_model(head, dense_matrix(meta_rows, meta_names), y);

  // bases refit on the full training data for inference
  const std::uint64_t full_seed = derive_seed(seed, "stack.full");
  for (std::size_t b = 0; b < n_bases; ++b) {
    ModelSpec spec = base_specs[b];
    spec.seed = derive_seed(full_seed, b);
    try {
      model.base_models.push_back(fit_model(spec, X, y));
    } catch (const std::exception& e) {
      throw Error("fit_stacking: base " + family_name(spec.family) + " " + spec.params.dump() +
                  " failed on the full data: " + e.what());
    }
  }
  return model;
}

std::vector<double> predict_stacking(const StackedModel& model, const FeatureMatrix& X) {
  const std::size_t n_bases = model.base_models.size();
  std::vector<std::vector<double>> meta_rows(X.rows(), std::vector<double>(n_bases));
  for (std::size_t b = 0; b < n_bases; ++b) {
    const auto probs = predict_proba(model.base_models[b], X);
    for (std::size_t i = 0; i < X.rows(); ++i) meta_rows[i][b] = probs[i];
  }
  return predict_proba(model.final_estimator, dense_matrix(meta_rows));
}

void serialize_stacked(BinaryWriter& w, const StackedModel& model) {
  w.u64(model.base_specs.size());
  for (std::size_t b = 0; b < model.base_specs.size(); ++b) {
    serialize_model(w, model.base_models[b]);
  }
  serialize_model(w, model.final_estimator);
  w.u64(model.folds.k);
  w.u64(model.folds.seed);
}

StackedModel deserialize_stacked(BinaryReader& r) {
  StackedModel model;
  const std::uint64_t n_bases = r.u64();
  for (std::uint64_t b = 0; b < n_bases; ++b) {
    model.base_models.push_back(deserialize_model(r));
    model.base_specs.push_back(model.base_models.back().spec);
  }
  model.final_estimator = deserialize_model(r);
  model.folds.k = r.u64();
  model.folds.seed = r.u64();
  return model;
}

}  // namespace mbti
