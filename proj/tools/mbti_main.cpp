#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "mbti/runner.hpp"
#include "mbti/util/csv.hpp"
#include "mbti/util/io.hpp"
#include "mbti/util/rng.hpp"

namespace {

using namespace mbti;

std::filesystem::path default_resources() {
  if (const char* env = std::getenv("MBTI_RESOURCES")) return env;
  return "resources";
}

struct CommonArgs {
  std::string data;
  std::string separator = "|||";
  std::vector<std::string> dichotomies;
  std::vector<std::string> experiments;
  std::uint64_t seed = 7;
  std::size_t folds = 5;
  std::string grid;
  std::string lexicons = default_resources().string();
  std::string out;
  std::vector<std::string> positive_labels;  // e.g. IE=E
  std::string balance_mode = "dichotomy";
  std::vector<std::string> families;
  std::string scorer = "f1_macro";
  bool no_type_scrub = false;
  bool no_learning_curve = false;
  bool no_importance = false;
  double test_fraction = 0.2;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_data = true) {
  auto* data = cmd->add_option("--data", args.data, "corpus CSV (header `type,posts`)");
  if (needs_data) data->required();
  cmd->add_option("--separator", args.separator, "post separator inside the posts field");
  cmd->add_option("--dichotomy", args.dichotomies, "subset of IE,NS,FT,JP (default: all)");
  cmd->add_option("--experiment", args.experiments,
                  "subset of baseline,sentiment,aspects,grammar,all (default: all)");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--folds", args.folds, "cross-validation folds")->check(CLI::Range(2, 100));
  cmd->add_option("--grid", args.grid, "hyperparameter grid JSON (overrides defaults)");
  cmd->add_option("--lexicons", args.lexicons,
                  "resource directory (default: $MBTI_RESOURCES or ./resources)");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--positive-label", args.positive_labels,
                  "positive letter per dichotomy, e.g. IE=E FT=F");
  cmd->add_option("--balance-mode", args.balance_mode, "dichotomy | uniform16 | none");
  cmd->add_option("--families", args.families,
                  "base model families (default: mnb,random_forest,logreg,knn,svm_rbf,mlp)");
  cmd->add_option("--scorer", args.scorer, "grid-search scorer (default f1_macro)");
  cmd->add_flag("--no-type-scrub", args.no_type_scrub,
                "keep literal type codes in the text (strict replication mode)");
  cmd->add_flag("--no-learning-curve", args.no_learning_curve, "skip learning curves");
  cmd->add_flag("--no-importance", args.no_importance, "skip the component analysis");
  cmd->add_option("--test-fraction", args.test_fraction, "held-out share (default 0.2)");
}

ExperimentConfig make_config(const CommonArgs& args) {
  ExperimentConfig config;
  config.data_path = args.data;
  config.separator = args.separator;
  if (!args.dichotomies.empty()) {
    config.dichotomies.clear();
    for (const auto& name : args.dichotomies) {
      config.dichotomies.push_back(dichotomy_from_name(name));
    }
  }
  if (!args.experiments.empty()) {
    config.experiments.clear();
    for (const auto& name : args.experiments) {
      config.experiments.push_back(experiment_from_name(name));
    }
  }
  config.seed = args.seed;
  config.folds = args.folds;
  if (!args.grid.empty()) config.grid_path = args.grid;
  config.resource_dir = args.lexicons;
  if (!args.out.empty()) config.output_dir = args.out;
  for (const auto& spec : args.positive_labels) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq + 2 != spec.size()) {
      throw InvalidArgument("--positive-label expects NAME=LETTER, e.g. IE=E");
    }
    config.positive_letter[dichotomy_from_name(spec.substr(0, eq))] = spec[eq + 1];
  }
  config.balance_mode = balance_mode_from_name(args.balance_mode);
  if (!args.families.empty()) {
    config.families.clear();
    for (const auto& name : args.families) config.families.push_back(family_from_name(name));
  }
  config.scorer = args.scorer;
  config.scrub_type_mentions = !args.no_type_scrub;
  config.compute_learning_curve = !args.no_learning_curve;
  config.compute_importance = !args.no_importance;
  config.test_fraction = args.test_fraction;
  return config;
}

int cmd_stats(const CommonArgs& args) {
  const Corpus corpus = load_corpus(args.data, args.separator);
  const CorpusStats stats = compute_stats(corpus);
  const std::string json = stats_to_json(stats);
  if (args.out.empty()) {
    std::cout << json << "\n";
    return 0;
  }
  std::filesystem::create_directories(args.out);
  write_text_file(std::filesystem::path(args.out) / "stats.json", json + "\n");

  // occurrence tables over a near-uniform 16-type sample
  const Corpus uniform = balance_uniform16(corpus, args.seed);
  const LexiconBundle lexicons = load_lexicon_bundle(args.lexicons);
  const LemmaTable lemmas =
      load_lemma_table(std::filesystem::path(args.lexicons) / "lemma_exceptions.json");
  std::vector<DichotomyLabels> labels;
  std::vector<std::vector<double>> sent_mass, aspect_mass, grammar_mass;
  for (const auto& rec : uniform.records) {
    const ProcessedDoc doc = preprocess(rec, lemmas);
    labels.push_back(rec.labels);
    const auto s = analyze_sentiment(doc, lexicons.sentiment);
    // extra aggregate row summing every sentiment category
    std::vector<double> srow(s.counts.begin(), s.counts.end());
    double total = 0.0;
    for (double v : s.counts) total += v;
    srow.push_back(total);
    sent_mass.push_back(std::move(srow));
    const auto a = analyze_aspects(doc, lexicons.aspects);
    aspect_mass.emplace_back(a.counts.begin(), a.counts.end());
    const auto g = analyze_grammar(doc, lexicons.grammar);
    grammar_mass.emplace_back(g.counts.begin(), g.counts.end());
  }
  std::vector<std::string> sent_rows(sentiment_category_display_names().begin(),
                                     sentiment_category_display_names().end());
  sent_rows.push_back("Sentiment");
  write_text_file(
      std::filesystem::path(args.out) / "occurrence_sentiment.csv",
      occurrence_table_to_csv(occurrence_table(sent_mass, labels, sent_rows), "Sentiment (%)"));
  write_text_file(std::filesystem::path(args.out) / "occurrence_aspects.csv",
                  occurrence_table_to_csv(
                      occurrence_table(aspect_mass, labels,
                                       {aspect_category_display_names().begin(),
                                        aspect_category_display_names().end()}),
                      "Aspects (%)"));
  write_text_file(std::filesystem::path(args.out) / "occurrence_grammar.csv",
                  occurrence_table_to_csv(
                      occurrence_table(grammar_mass, labels,
                                       {syntactic_term_display_names().begin(),
                                        syntactic_term_display_names().end()}),
                      "Syntactic Terms (%)"));
  std::cout << "wrote stats.json and occurrence tables to " << args.out << "\n";
  return 0;
}

int cmd_prepare(const CommonArgs& args) {
  if (args.out.empty()) throw InvalidArgument("prepare: --out is required");
  ExperimentConfig config = make_config(args);
  const Experiment experiment =
      config.experiments.size() == 1 ? config.experiments.front() : Experiment::All;
  const Corpus corpus = load_corpus(config.data_path, config.separator);
  const LexiconBundle lexicons = load_lexicon_bundle(config.resource_dir);
  const StopwordList stopwords = load_stopwords(config.resource_dir / "stopwords.txt");
  const LemmaTable lemmas = load_lemma_table(config.resource_dir / "lemma_exceptions.json");

  std::filesystem::create_directories(args.out);
  for (Dichotomy d : config.dichotomies) {
    const std::uint64_t cell_seed = derive_seed(config.seed, "cell." + dichotomy_name(d));
    Corpus balanced;
    switch (config.balance_mode) {
      case BalanceMode::Dichotomy: balanced = balance(corpus, d, cell_seed); break;
      case BalanceMode::Uniform16: balanced = balance_uniform16(corpus, cell_seed); break;
      case BalanceMode::None: balanced = corpus; break;
    }
    const SplitResult parts = split(balanced, config.test_fraction, d, cell_seed);
    PreprocessOptions popts;
    popts.scrub_type_mentions = config.scrub_type_mentions;

    TfidfModel tfidf;
    DenseScaler scaler;
    const std::vector<std::size_t> selection = experiment_selection(experiment);
    for (const bool is_train : {true, false}) {
      const Corpus& part = is_train ? parts.train : parts.test;
      std::vector<HandcraftedFeatures> hc;
      std::vector<TermList> terms;
      for (const auto& rec : part.records) {
        const ProcessedDoc doc = preprocess(rec, lemmas, popts);
        hc.push_back(analyze_all(doc, lexicons));
        terms.push_back(tfidf_terms(doc, stopwords));
      }
      if (is_train) {
        tfidf = fit_tfidf(terms, config.tfidf);
        scaler = fit_scaler(hc, selection);
      }
      std::vector<SparseRow> rows;
      for (const auto& t : terms) rows.push_back(transform(tfidf, t));
      const FeatureMatrix x = assemble(rows, hc, selection, scaler, tfidf);
      std::vector<int> y;
      for (const auto& rec : part.records) y.push_back(config.label_of(rec.labels, d));
      const std::string name = std::string(is_train ? "train_" : "test_") + dichotomy_name(d) +
                               "_" + experiment_name(experiment) + ".fmx";
      save_feature_matrix(x, y, std::filesystem::path(args.out) / name);
      std::cout << "wrote " << name << " (" << x.rows() << " x " << x.cols() << ")\n";
    }
  }
  return 0;
}

int cmd_train(const CommonArgs& args) {
  if (args.out.empty()) throw InvalidArgument("train: --out is required (bundle file path)");
  ExperimentConfig config = make_config(args);
  const Experiment experiment =
      config.experiments.size() == 1 ? config.experiments.front() : Experiment::All;
  const ModelBundle bundle = train_bundle(config, experiment);
  const std::filesystem::path out = args.out;
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  save_bundle(bundle, out);
  std::cout << "trained " << bundle.pipelines.size() << " pipeline(s) -> " << args.out << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& bundle_path) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const Corpus corpus = load_corpus(args.data, bundle.separator);
  const auto reports = evaluate_bundle(bundle, corpus, args.lexicons);
  nlohmann::json j;
  for (const auto& [dichotomy, report] : reports) {
    for (std::size_t m = 0; m < 10; ++m) {
      j[dichotomy][metric_names()[m]] = report.values()[m];
    }
  }
  const std::string text = j.dump(2);
  if (args.out.empty()) {
    std::cout << text << "\n";
  } else {
    std::filesystem::create_directories(args.out);
    write_text_file(std::filesystem::path(args.out) / "evaluation.json", text + "\n");
    std::cout << "wrote evaluation.json to " << args.out << "\n";
  }
  return 0;
}

int cmd_experiment(const CommonArgs& args) {
  const ExperimentConfig config = make_config(args);
  const ExperimentReport report = run(config);
  if (!config.output_dir.empty()) {
    emit_reports(report, config.output_dir);
    std::cout << "wrote report bundle to " << config.output_dir.string() << "\n";
  } else {
    std::cout << report_to_json(report).dump(2) << "\n";
  }
  std::size_t failures = 0;
  for (const auto& cell : report.cells) {
    std::cerr << dichotomy_name(cell.dichotomy) << "/" << experiment_name(cell.experiment)
              << ": " << (cell.ok ? "ok" : "FAILED (" + cell.error + ")") << "\n";
    if (!cell.ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_ablate(const CommonArgs& args, const std::string& component) {
  const ExperimentConfig config = make_config(args);
  const AblationReport report = run_ablation(config, ablation_component_from_name(component));
  const nlohmann::json j = ablation_to_json(report);
  if (!args.out.empty()) {
    std::filesystem::create_directories(args.out);
    write_text_file(std::filesystem::path(args.out) / "ablation.json", j.dump(2) + "\n");
    std::cout << "wrote ablation.json to " << args.out << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return report.with_component.all_ok() && report.without_component.all_ok() ? 0 : 1;
}

int cmd_importance(const CommonArgs& args) {
  ExperimentConfig config = make_config(args);
  if (config.dichotomies.size() != 1 || config.experiments.size() != 1) {
    throw InvalidArgument("importance: pass exactly one --dichotomy and one --experiment");
  }
  const Dichotomy d = config.dichotomies.front();
  const Experiment e = config.experiments.front();
  const Corpus corpus = load_corpus(config.data_path, config.separator);
  const LexiconBundle lexicons = load_lexicon_bundle(config.resource_dir);
  const StopwordList stopwords = load_stopwords(config.resource_dir / "stopwords.txt");
  const LemmaTable lemmas = load_lemma_table(config.resource_dir / "lemma_exceptions.json");

  const std::uint64_t cell_seed = derive_seed(config.seed, "cell." + dichotomy_name(d));
  const Corpus balanced =
      config.balance_mode == BalanceMode::None ? corpus : balance(corpus, d, cell_seed);
  const SplitResult parts = split(balanced, config.test_fraction, d, cell_seed);
  PreprocessOptions popts;
  popts.scrub_type_mentions = config.scrub_type_mentions;
  std::vector<HandcraftedFeatures> hc;
  std::vector<TermList> terms;
  for (const auto& rec : parts.train.records) {
    const ProcessedDoc doc = preprocess(rec, lemmas, popts);
    hc.push_back(analyze_all(doc, lexicons));
    terms.push_back(tfidf_terms(doc, stopwords));
  }
  const TfidfModel tfidf = fit_tfidf(terms, config.tfidf);
  std::vector<SparseRow> rows;
  for (const auto& t : terms) rows.push_back(transform(tfidf, t));
  const auto selection = experiment_selection(e);
  const DenseScaler scaler = fit_scaler(hc, selection);
  const FeatureMatrix x = assemble(rows, hc, selection, scaler, tfidf);

  PcaOptions opts;
  opts.seed = cell_seed;
  const PCAModel pca = fit_pca(x, opts);
  const ImportanceRanking ranking = rank_features(pca, x.column_names, 10);

  std::string csv = "feature,importance_percent\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(50, ranking.items.size()); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", ranking.items[i].second);
    csv += csv_quote(ranking.items[i].first) + "," + buf + "\n";
  }
  std::string scree = "component,explained_variance_ratio\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(50, pca.n_components); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8f", pca.explained_variance_ratio[i]);
    scree += std::to_string(i + 1) + "," + buf + "\n";
  }
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    std::filesystem::create_directories(args.out);
    const std::string tag = dichotomy_name(d) + "_" + experiment_name(e);
    write_text_file(std::filesystem::path(args.out) / ("importance_" + tag + ".csv"), csv);
    write_text_file(std::filesystem::path(args.out) / ("scree_" + tag + ".csv"), scree);
    std::cout << "wrote importance_" << tag << ".csv and scree_" << tag << ".csv\n";
  }
  return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& bundle_path, std::string text,
                const std::string& text_file) {
  const ModelBundle bundle = load_bundle(bundle_path);
  if (!text_file.empty()) text = read_text_file(text_file);
  const Prediction pred = predict_text(bundle, text, args.lexicons);
  nlohmann::json j;
  for (const auto& [dichotomy, p] : pred.probabilities) {
    j["probabilities"][dichotomy] = {
        {"positive_letter", std::string(1, pred.positive.at(dichotomy))}, {"p", p}};
  }
  const auto flat = pred.features.flat();
  const auto& names = handcrafted_column_names();
  for (std::size_t i = 0; i < flat.size(); ++i) j["features"][names[i]] = flat[i];
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_lexicon_validate(const CommonArgs& args) {
  const LexiconBundle lexicons = load_lexicon_bundle(args.lexicons);
  std::set<std::string> vocab;
  const bool with_corpus = !args.data.empty();
  if (with_corpus) {
    const Corpus corpus = load_corpus(args.data, args.separator);
    const LemmaTable lemmas =
        load_lemma_table(std::filesystem::path(args.lexicons) / "lemma_exceptions.json");
    for (const auto& rec : corpus.records) {
      const ProcessedDoc doc = preprocess(rec, lemmas);
      vocab.insert(doc.tokens.begin(), doc.tokens.end());
      vocab.insert(doc.lemmas.begin(), doc.lemmas.end());
    }
  }
  std::size_t total = 0;
  auto print = [&](const std::string& which, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) {
      std::cout << which << ": " << w << "\n";
      ++total;
    }
  };
  print("sentiment", validate_lexicon(lexicons.sentiment, with_corpus ? &vocab : nullptr));
  print("aspects", validate_lexicon(lexicons.aspects, with_corpus ? &vocab : nullptr));
  print("grammar", validate_lexicon(lexicons.grammar, with_corpus ? &vocab : nullptr));
  std::cout << (total == 0 ? "no warnings\n" : std::to_string(total) + " warning(s)\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MBTI dichotomy text-classification workbench"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string bundle_path, ablate_component, predict_text_arg, predict_file;

  auto* stats = app.add_subcommand("stats", "corpus statistics and occurrence tables");
  add_common(stats, args);

  auto* prepare = app.add_subcommand("prepare", "persist assembled feature matrices");
  add_common(prepare, args);

  auto* train = app.add_subcommand("train", "fit stacked pipelines into a model bundle");
  add_common(train, args);

  auto* evaluate = app.add_subcommand("evaluate", "score a bundle against a labeled CSV");
  add_common(evaluate, args);
  evaluate->add_option("--bundle", bundle_path, "model bundle path")->required();

  auto* experiment = app.add_subcommand("experiment", "full dichotomy x experiment protocol");
  add_common(experiment, args);

  auto* ablate = app.add_subcommand("ablate", "paired runs with one component removed");
  add_common(ablate, args);
  ablate
      ->add_option("--component", ablate_component,
                   "cleaning | stopwords | lemmatize | sentiment-block | aspect-block | "
                   "grammar-block | stacking")
      ->required();

  auto* importance = app.add_subcommand("importance", "component analysis of one cell");
  add_common(importance, args);

  auto* predict = app.add_subcommand("predict", "per-dichotomy probabilities for a text");
  add_common(predict, args, /*needs_data=*/false);
  predict->add_option("--bundle", bundle_path, "model bundle path")->required();
  predict->add_option("--text", predict_text_arg, "text to classify");
  predict->add_option("--text-file", predict_file, "file with the text to classify");

  auto* lexicon = app.add_subcommand("lexicon", "lexicon utilities");
  auto* lexicon_validate = lexicon->add_subcommand("validate", "warn about lexicon issues");
  add_common(lexicon_validate, args, /*needs_data=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(args);
    if (prepare->parsed()) return cmd_prepare(args);
    if (train->parsed()) return cmd_train(args);
    if (evaluate->parsed()) return cmd_evaluate(args, bundle_path);
    if (experiment->parsed()) return cmd_experiment(args);
    if (ablate->parsed()) return cmd_ablate(args, ablate_component);
    if (importance->parsed()) return cmd_importance(args);
    if (predict->parsed()) return cmd_predict(args, bundle_path, predict_text_arg, predict_file);
    if (lexicon->parsed() && lexicon_validate->parsed()) return cmd_lexicon_validate(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "no subcommand\n";
  return 2;
}
