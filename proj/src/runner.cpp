#include "mbti/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "feature_ops.hpp"
#include "mbti/util/parallel.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

std::string balance_mode_name(BalanceMode mode) {
  switch (mode) {
    case BalanceMode::Dichotomy: return "dichotomy";
    case BalanceMode::Uniform16: return "uniform16";
    case BalanceMode::None: return "none";
  }
  return "?";
}

BalanceMode balance_mode_from_name(const std::string& name) {
  if (name == "dichotomy") return BalanceMode::Dichotomy;
  if (name == "uniform16") return BalanceMode::Uniform16;
  if (name == "none") return BalanceMode::None;
  throw InvalidArgument("unknown balance mode: " + name +
                        " (expected dichotomy, uniform16 or none)");
}

std::string ablation_component_name(AblationComponent c) {
  switch (c) {
    case AblationComponent::Cleaning: return "cleaning";
    case AblationComponent::Stopwords: return "stopwords";
    case AblationComponent::Lemmatize: return "lemmatize";
    case AblationComponent::SentimentBlock: return "sentiment-block";
    case AblationComponent::AspectBlock: return "aspect-block";
    case AblationComponent::GrammarBlock: return "grammar-block";
    case AblationComponent::Stacking: return "stacking";
  }
  return "?";
}

AblationComponent ablation_component_from_name(const std::string& name) {
  for (AblationComponent c :
       {AblationComponent::Cleaning, AblationComponent::Stopwords, AblationComponent::Lemmatize,
        AblationComponent::SentimentBlock, AblationComponent::AspectBlock,
        AblationComponent::GrammarBlock, AblationComponent::Stacking}) {
    if (ablation_component_name(c) == name) return c;
  }
  throw InvalidArgument("unknown ablation component: " + name);
}

char ExperimentConfig::positive_for(Dichotomy d) const {
  const auto it = positive_letter.find(d);
  if (it == positive_letter.end()) return dichotomy_second_letter(d);
  const char c = it->second;
  if (c != dichotomy_first_letter(d) && c != dichotomy_second_letter(d)) {
    throw InvalidArgument(std::string("positive letter ") + c + " is not part of " +
                          dichotomy_name(d));
  }
  return c;
}

int ExperimentConfig::label_of(const DichotomyLabels& labels, Dichotomy d) const {
  const bool is_first = labels.first_of(d);
  const bool positive_is_first = positive_for(d) == dichotomy_first_letter(d);
  return (is_first == positive_is_first) ? 1 : 0;
}

const CellResult* ExperimentReport::cell(Dichotomy d, Experiment e) const {
  for (const auto& cell : cells) {
    if (cell.dichotomy == d && cell.experiment == e) return &cell;
  }
  return nullptr;
}

bool ExperimentReport::all_ok() const {
  if (cells.empty()) return false;
  for (const auto& cell : cells) {
    if (!cell.ok) return false;
  }
  return true;
}

namespace {

struct Resources {
  LexiconBundle lexicons;
  StopwordList stopwords;
  LemmaTable lemmas;
};

Resources load_resources(const std::filesystem::path& dir) {
  Resources res;
  res.lexicons = load_lexicon_bundle(dir);
  res.stopwords = load_stopwords(dir / "stopwords.txt");
  res.lemmas = load_lemma_table(dir / "lemma_exceptions.json");
  return res;
}

struct DichotomyData {
  std::vector<ProcessedDoc> docs_train, docs_test;
  std::vector<HandcraftedFeatures> hc_train, hc_test;
  TfidfModel tfidf;
  std::vector<SparseRow> rows_train, rows_test;
  std::vector<int> y_train, y_test;
};

std::vector<ProcessedDoc> preprocess_corpus(const Corpus& corpus, const Resources& res,
                                            const ExperimentConfig& config) {
  PreprocessOptions opts;
  opts.do_clean = !config.ablate.cleaning;
  opts.scrub_type_mentions = config.scrub_type_mentions;
  std::vector<ProcessedDoc> docs(corpus.records.size());
  parallel_for(corpus.records.size(), [&](std::size_t i) {
    docs[i] = preprocess(corpus.records[i], res.lemmas, opts);
  });
  return docs;
}

DichotomyData prepare_dichotomy(const ExperimentConfig& config, const Corpus& corpus,
                                const Resources& res, Dichotomy d, std::uint64_t cell_seed) {
  Corpus balanced;
  switch (config.balance_mode) {
    case BalanceMode::Dichotomy: balanced = balance(corpus, d, cell_seed); break;
    case BalanceMode::Uniform16: balanced = balance_uniform16(corpus, cell_seed); break;
    case BalanceMode::None: balanced = corpus; break;
  }
  const SplitResult parts = split(balanced, config.test_fraction, d, cell_seed);

  DichotomyData data;
  data.docs_train = preprocess_corpus(parts.train, res, config);
  data.docs_test = preprocess_corpus(parts.test, res, config);

  data.hc_train.resize(data.docs_train.size());
  parallel_for(data.docs_train.size(), [&](std::size_t i) {
    data.hc_train[i] = analyze_all(data.docs_train[i], res.lexicons);
  });
  data.hc_test.resize(data.docs_test.size());
  parallel_for(data.docs_test.size(), [&](std::size_t i) {
    data.hc_test[i] = analyze_all(data.docs_test[i], res.lexicons);
  });

  TermOptions term_opts;
  term_opts.remove_stopwords = !config.ablate.stopwords;
  term_opts.use_lemmas = !config.ablate.lemmatize;
  std::vector<TermList> terms_train(data.docs_train.size());
  for (std::size_t i = 0; i < data.docs_train.size(); ++i) {
    terms_train[i] = tfidf_terms(data.docs_train[i], res.stopwords, term_opts);
  }
  data.tfidf = fit_tfidf(terms_train, config.tfidf);
  data.rows_train.resize(terms_train.size());
  for (std::size_t i = 0; i < terms_train.size(); ++i) {
    data.rows_train[i] = transform(data.tfidf, terms_train[i]);
  }
  data.rows_test.resize(data.docs_test.size());
  for (std::size_t i = 0; i < data.docs_test.size(); ++i) {
    data.rows_test[i] = transform(data.tfidf, tfidf_terms(data.docs_test[i], res.stopwords,
                                                          term_opts));
  }

  for (const auto& rec : parts.train.records) data.y_train.push_back(config.label_of(rec.labels, d));
  for (const auto& rec : parts.test.records) data.y_test.push_back(config.label_of(rec.labels, d));
  return data;
}

std::vector<std::size_t> cell_selection(const ExperimentConfig& config, Experiment e) {
  std::vector<std::size_t> selection = experiment_selection(e);
  const std::size_t s = kSentimentCategoryCount;
  const std::size_t a = kAspectCategoryCount;
  std::erase_if(selection, [&](std::size_t idx) {
    if (config.ablate.sentiment_block && idx < s) return true;
    if (config.ablate.aspect_block && idx >= s && idx < s + a) return true;
    if (config.ablate.grammar_block && idx >= s + a) return true;
    return false;
  });
  return selection;
}

GridSet effective_grids(const ExperimentConfig& config) {
  GridSet grids = default_grid_set();
  if (!config.grid_path.empty()) {
    const GridSet overrides = parse_grid_set(read_text_file(config.grid_path));
    for (const auto& [family, grid] : overrides) grids[family] = grid;
  }
  return grids;
}

CellResult run_cell(const ExperimentConfig& config, const DichotomyData& data,
                    const GridSet& grids, Dichotomy d, Experiment e, std::uint64_t cell_seed) {
  const auto start = std::chrono::steady_clock::now();
  CellResult cell;
  cell.dichotomy = d;
  cell.experiment = e;

  const std::vector<std::size_t> selection = cell_selection(config, e);
  const DenseScaler scaler = fit_scaler(data.hc_train, selection);
  const FeatureMatrix x_train =
      assemble(data.rows_train, data.hc_train, selection, scaler, data.tfidf);
  const FeatureMatrix x_test =
      assemble(data.rows_test, data.hc_test, selection, scaler, data.tfidf);
  cell.n_train = x_train.rows();
  cell.n_test = x_test.rows();
  cell.n_features = x_train.cols();

  const std::uint64_t grid_seed = derive_seed(cell_seed, "grid");
  std::vector<ModelSpec> base_specs;
  double best_cv = -1.0;
  ModelSpec best_single;
  for (ModelFamily family : config.families) {
    GridSearchResult result = grid_search(family, grids.at(family), x_train, data.y_train,
                                          config.folds, config.scorer, grid_seed);
    if (result.best_score > best_cv) {
      best_cv = result.best_score;
      best_single = result.best_spec;
    }
    base_specs.push_back(result.best_spec);
    cell.grids.emplace(family, std::move(result));
  }

  std::vector<double> probs;
  if (config.ablate.stacking || base_specs.size() < 2) {
    cell.used_stacking = false;
    ModelSpec spec = best_single;
    spec.seed = derive_seed(cell_seed, "single.fit");
    cell.stack_bases = {spec};
    const TrainedModel model = fit_model(spec, x_train, data.y_train);
    probs = predict_proba(model, x_test);
  } else {
    const StackedModel stacked =
        fit_stacking(base_specs, default_final_spec(), x_train, data.y_train, config.folds,
                     derive_seed(cell_seed, "stack"));
    cell.stack_bases = base_specs;
    probs = predict_stacking(stacked, x_test);
  }
  std::vector<int> pred(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = label_from_probability(probs[i]);
  cell.metrics = full_report(data.y_test, pred, probs, 1);
  cell.confusion = confusion(data.y_test, pred, 1);

  if (config.compute_learning_curve) {
    cell.curve = learning_curve(best_single, x_train, data.y_train, config.learning_curve_sizes,
                                config.folds, derive_seed(cell_seed, "lc"));
  }

  if (config.compute_importance) {
    PcaOptions pca_opts;
    pca_opts.seed = derive_seed(cell_seed, "pca");
    const PCAModel pca = fit_pca(x_train, pca_opts);
    ImportanceRanking ranking =
        rank_features(pca, x_train.column_names, config.importance_top_components);
    if (ranking.items.size() > 50) ranking.items.resize(50);
    cell.importance = std::move(ranking);
    const std::size_t scree_n = std::min<std::size_t>(50, pca.n_components);
    cell.scree.assign(pca.explained_variance_ratio.begin(),
                      pca.explained_variance_ratio.begin() + scree_n);
    cell.cumulative_variance_10 =
        cumulative_explained_variance(pca, std::min<std::size_t>(10, pca.n_components));
    const CorrelationReport corr = feature_component_correlation(
        x_train, pca, std::min<std::size_t>(config.importance_top_components, pca.n_components));
    for (std::size_t j = 0; j < x_train.column_names.size(); ++j) {
      const std::string& name = x_train.column_names[j];
      const std::string block = name.substr(0, name.find(':'));
      auto [it, inserted] = cell.block_max_correlation.emplace(block, 0.0);
      it->second = std::max(it->second, corr.max_abs_r[j]);
    }
  }

  cell.ok = true;
  cell.wall_ms = ms_since(start);
  return cell;
}

}  // namespace

ExperimentReport run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.seed = config.seed;
  report.timestamp = now_iso8601();

  const Corpus corpus = load_corpus(config.data_path, config.separator);
  report.data_source = corpus.provenance.source_path;
  const Resources res = load_resources(config.resource_dir);
  report.lexicon_versions = res.lexicons.sentiment.version + "," + res.lexicons.aspects.version +
                            "," + res.lexicons.grammar.version + "," + res.lemmas.version;
  const GridSet grids = effective_grids(config);

  for (Dichotomy d : config.dichotomies) {
    const std::uint64_t cell_seed = derive_seed(config.seed, "cell." + dichotomy_name(d));
    DichotomyData data;
    bool prepared = false;
    std::string prepare_error;
    try {
      data = prepare_dichotomy(config, corpus, res, d, cell_seed);
      prepared = true;
    } catch (const std::exception& e) {
      prepare_error = e.what();
    }
    for (Experiment e : config.experiments) {
      if (!prepared) {
        CellResult failed;
        failed.dichotomy = d;
        failed.experiment = e;
        failed.ok = false;
        failed.error = "preparation failed: " + prepare_error;
        report.cells.push_back(std::move(failed));
        continue;
      }
      try {
        report.cells.push_back(run_cell(config, data, grids, d, e, cell_seed));
      } catch (const std::exception& ex) {
        CellResult failed;
        failed.dichotomy = d;
        failed.experiment = e;
        failed.ok = false;
        failed.error = ex.what();
        report.cells.push_back(std::move(failed));
      }
    }
  }
  report.wall_ms = ms_since(start);
  return report;
}

AblationReport run_ablation(const ExperimentConfig& config, AblationComponent component) {
  AblationReport report;
  report.component = component;
  report.with_component = run(config);

  ExperimentConfig ablated = config;
  switch (component) {
    case AblationComponent::Cleaning: ablated.ablate.cleaning = true; break;
    case AblationComponent::Stopwords: ablated.ablate.stopwords = true; break;
    case AblationComponent::Lemmatize: ablated.ablate.lemmatize = true; break;
    case AblationComponent::SentimentBlock: ablated.ablate.sentiment_block = true; break;
    case AblationComponent::AspectBlock: ablated.ablate.aspect_block = true; break;
    case AblationComponent::GrammarBlock: ablated.ablate.grammar_block = true; break;
    case AblationComponent::Stacking: ablated.ablate.stacking = true; break;
  }
  report.without_component = run(ablated);

  for (std::size_t i = 0; i < report.with_component.cells.size(); ++i) {
    std::map<std::string, double> delta;
    const CellResult& a = report.with_component.cells[i];
    const CellResult& b = report.without_component.cells[i];
    if (a.ok && b.ok) {
      const auto va = a.metrics.values();
      const auto vb = b.metrics.values();
      for (std::size_t m = 0; m < va.size(); ++m) {
        delta[metric_names()[m]] = vb[m] - va[m];  // ablated minus original
      }
    }
    report.deltas.push_back(std::move(delta));
  }
  return report;
}

}  // namespace mbti
