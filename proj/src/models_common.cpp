#include <algorithm>

#include "feature_ops.hpp"
#include "mbti/models.hpp"

namespace mbti {

namespace ops {

FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows) {
  FeatureMatrix out;
  out.n_rows = rows.size();
  out.sparse_cols = X.sparse_cols;
  out.dense_cols = X.dense_cols;
  out.column_names = X.column_names;
  out.indptr.reserve(rows.size() + 1);
  out.indptr.push_back(0);
  for (std::size_t r : rows) {
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    out.indices.insert(out.indices.end(), idx.begin(), idx.end());
    out.values.insert(out.values.end(), val.begin(), val.end());
    out.indptr.push_back(out.indices.size());
    const auto d = X.dense_row(r);
    out.dense.insert(out.dense.end(), d.begin(), d.end());
  }
  return out;
}

void check_width(const FeatureMatrix& X, std::size_t expected, const char* what) {
  if (X.cols() != expected) {
    throw InvalidArgument(std::string(what) + ": feature width mismatch (got " +
                          std::to_string(X.cols()) + ", trained on " + std::to_string(expected) +
                          ")");
  }
}

void check_binary_labels(const std::vector<int>& y, std::size_t n_rows, const char* what,
                         bool require_both) {
  if (y.size() != n_rows) {
    throw InvalidArgument(std::string(what) + ": label count does not match row count");
  }
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == 0) has_neg = true;
    else throw InvalidArgument(std::string(what) + ": labels must be 0 or 1");
  }
  if (require_both && (!has_pos || !has_neg)) {
    throw InvalidArgument(std::string(what) + ": both labels must be present");
  }
}

}  // namespace ops

const std::vector<ModelFamily>& all_families() {
  static const std::vector<ModelFamily> v = {ModelFamily::MNB,    ModelFamily::RandomForest,
                                             ModelFamily::LogReg, ModelFamily::KNN,
                                             ModelFamily::SvmRbf, ModelFamily::MLP};
  return v;
}

std::string family_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::MNB: return "mnb";
    case ModelFamily::RandomForest: return "random_forest";
    case ModelFamily::LogReg: return "logreg";
    case ModelFamily::KNN: return "knn";
    case ModelFamily::SvmRbf: return "svm_rbf";
    case ModelFamily::MLP: return "mlp";
  }
  return "?";
}

ModelFamily family_from_name(const std::string& name) {
  for (ModelFamily f : all_families()) {
    if (family_name(f) == name) return f;
  }
  throw InvalidArgument("unknown model family: " + name);
}

std::string criterion_name(SplitCriterion c) {
  return c == SplitCriterion::Gini ? "gini" : "entropy";
}

SplitCriterion criterion_from_name(const std::string& name) {
  if (name == "gini") return SplitCriterion::Gini;
  if (name == "entropy") return SplitCriterion::Entropy;
  throw InvalidArgument("unknown split criterion: " + name);
}

namespace {

struct ParamRule {
  const char* name;
  bool (*check)(const nlohmann::json& v);
  const char* expectation;
};

bool positive_number(const nlohmann::json& v) { return v.is_number() && v.get<double>() > 0.0; }
bool positive_int(const nlohmann::json& v) {
  return v.is_number_integer() && v.get<long long>() >= 1;
}

const std::vector<ParamRule>& family_schema(ModelFamily family) {
  static const std::vector<ParamRule> mnb = {
      {"alpha", positive_number, "a number > 0"},
  };
  static const std::vector<ParamRule> forest = {
      {"n_trees",
       [](const nlohmann::json& v) { return v.is_number_integer() && v.get<long long>() >= 100; },
       "an integer >= 100"},
      {"criterion",
       [](const nlohmann::json& v) {
         return v.is_string() && (v == "gini" || v == "entropy");
       },
       "\"gini\" or \"entropy\""},
  };
  static const std::vector<ParamRule> logreg = {
      {"C", positive_number, "a number > 0"},
      {"penalty",
       [](const nlohmann::json& v) {
         return v.is_string() && (v == "l2" || v == "elasticnet");
       },
       "\"l2\" or \"elasticnet\""},
      {"rho",
       [](const nlohmann::json& v) {
         return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0;
       },
       "a number in [0,1]"},
      {"solver",
       [](const nlohmann::json& v) {
         return v.is_string() && (v == "quasi-newton" || v == "newton-cg");
       },
       "\"quasi-newton\" or \"newton-cg\""},
  };
  static const std::vector<ParamRule> knn = {
      {"k", positive_int, "an integer >= 1"},
      {"p",
       [](const nlohmann::json& v) { return v.is_number() && v.get<double>() >= 1.0; },
       "a number >= 1"},
  };
  static const std::vector<ParamRule> svm = {
      {"C", positive_number, "a number > 0"},
      {"gamma",
       [](const nlohmann::json& v) {
         return (v.is_string() && v == "scale") || (v.is_number() && v.get<double>() > 0.0);
       },
       "\"scale\" or a number > 0"},
  };
  static const std::vector<ParamRule> mlp = {
      {"hidden",
       [](const nlohmann::json& v) {
         if (!v.is_array() || v.empty()) return false;
         for (const auto& w : v) {
           if (!w.is_number_integer() || w.get<long long>() < 1) return false;
         }
         return true;
       },
       "a non-empty array of integers >= 1"},
      {"max_iter", positive_int, "an integer >= 1"},
      {"batch_size", positive_int, "an integer >= 1"},
  };
  switch (family) {
    case ModelFamily::MNB: return mnb;
    case ModelFamily::RandomForest: return forest;
    case ModelFamily::LogReg: return logreg;
    case ModelFamily::KNN: return knn;
    case ModelFamily::SvmRbf: return svm;
    case ModelFamily::MLP: return mlp;
  }
  return mnb;
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
  const auto& schema = family_schema(spec.family);
  for (const auto& [key, value] : spec.params.items()) {
    const auto rule = std::find_if(schema.begin(), schema.end(),
                                   [&](const ParamRule& r) { return key == r.name; });
    if (rule == schema.end()) {
      throw InvalidArgument("unknown hyperparameter `" + key + "` for family " +
                            family_name(spec.family));
    }
    if (!rule->check(value)) {
      throw InvalidArgument("hyperparameter `" + key + "` for family " +
                            family_name(spec.family) + " must be " + rule->expectation);
    }
  }
}

ModelSpec default_spec(ModelFamily family, std::uint64_t seed) {
  ModelSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case ModelFamily::MNB: spec.params = {{"alpha", 1.0}}; break;
    case ModelFamily::RandomForest:
      spec.params = {{"n_trees", 100}, {"criterion", "gini"}};
      break;
    case ModelFamily::LogReg:
      spec.params = {{"C", 1.0}, {"penalty", "l2"}, {"solver", "quasi-newton"}};
      break;
    case ModelFamily::KNN: spec.params = {{"k", 5}, {"p", 2.0}}; break;
    case ModelFamily::SvmRbf: spec.params = {{"C", 1.0}, {"gamma", "scale"}}; break;
    case ModelFamily::MLP: spec.params = {{"hidden", {100}}, {"max_iter", 500}}; break;
  }
  return spec;
}

TrainedModel fit_model(const ModelSpec& spec, const FeatureMatrix& X, const std::vector<int>& y) {
  validate_spec(spec);
  const auto& p = spec.params;
  switch (spec.family) {
    case ModelFamily::MNB:
      return fit_mnb(X, y, p.value("alpha", 1.0), spec.seed);
    case ModelFamily::RandomForest:
      return fit_random_forest(X, y, p.value("n_trees", 100),
                               criterion_from_name(p.value("criterion", "gini")), spec.seed);
    case ModelFamily::LogReg: {
      LogRegOptions opt;
      opt.C = p.value("C", 1.0);
      opt.penalty = p.value("penalty", "l2") == std::string("elasticnet") ? Penalty::ElasticNet
                                                                          : Penalty::L2;
      opt.rho = p.value("rho", 0.5);
      opt.solver = p.value("solver", "quasi-newton") == std::string("newton-cg")
                       ? LogRegSolver::NewtonCg
                       : LogRegSolver::QuasiNewton;
      return fit_logreg(X, y, opt, spec.seed);
    }
    case ModelFamily::KNN:
      return fit_knn(X, y, p.value("k", 5), p.value("p", 2.0), spec.seed);
    case ModelFamily::SvmRbf: {
      SvmOptions opt;
      opt.C = p.value("C", 1.0);
      if (p.contains("gamma") && p["gamma"].is_number()) opt.gamma = p["gamma"].get<double>();
      return fit_svm_rbf(X, y, opt, spec.seed);
    }
    case ModelFamily::MLP: {
      MlpOptions opt;
      if (p.contains("hidden")) opt.hidden = p["hidden"].get<std::vector<std::size_t>>();
      opt.max_iter = p.value("max_iter", 500);
      if (p.contains("batch_size")) opt.batch_size = p["batch_size"].get<std::size_t>();
      return fit_mlp(X, y, opt, spec.seed);
    }
  }
  throw InvalidArgument("unhandled model family");
}

std::vector<int> predict_label(const TrainedModel& model, const FeatureMatrix& X) {
  const auto probs = predict_proba(model, X);
  std::vector<int> labels(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) labels[i] = label_from_probability(probs[i]);
  return labels;
}

}  // namespace mbti
