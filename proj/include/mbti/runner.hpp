#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbti/analyzers.hpp"
#include "mbti/corpus.hpp"
#include "mbti/ensemble.hpp"
#include "mbti/importance.hpp"
#include "mbti/metrics.hpp"
#include "mbti/synthetic.hpp"
#include "mbti/textprep.hpp"
#include "mbti/vectorize.hpp"

namespace mbti {

enum class BalanceMode { Dichotomy, Uniform16, None };
std::string balance_mode_name(BalanceMode mode);
BalanceMode balance_mode_from_name(const std::string& name);

enum class AblationComponent {
  Cleaning,
  Stopwords,
  Lemmatize,
  SentimentBlock,
  AspectBlock,
  GrammarBlock,
  Stacking,  // replaced by the best single base model
};
std::string ablation_component_name(AblationComponent c);
AblationComponent ablation_component_from_name(const std::string& name);

struct AblationToggles {
  bool cleaning = false;
  bool stopwords = false;
  bool lemmatize = false;
  bool sentiment_block = false;
  bool aspect_block = false;
  bool grammar_block = false;
  bool stacking = false;
};

struct ExperimentConfig {
  std::filesystem::path data_path;
  std::string separator = "|||";
  std::vector<Dichotomy> dichotomies{kAllDichotomies.begin(), kAllDichotomies.end()};
  std::vector<Experiment> experiments = all_experiments();
  std::uint64_t seed = 7;
  std::size_t folds = 5;
  std::filesystem::path grid_path;  // empty: built-in default grids
  std::filesystem::path resource_dir = "resources";
  std::filesystem::path output_dir;
  std::map<Dichotomy, char> positive_letter;  // default: E, S, T, P
  BalanceMode balance_mode = BalanceMode::Dichotomy;
  double test_fraction = 0.2;
  std::vector<ModelFamily> families = all_families();
  std::string scorer = "f1_macro";
  bool scrub_type_mentions = true;
  TfidfConfig tfidf;
  std::vector<double> learning_curve_sizes = {0.1, 0.325, 0.55, 0.775, 1.0};
  bool compute_learning_curve = true;
  bool compute_importance = true;
  std::size_t importance_top_components = 10;
  AblationToggles ablate;

  char positive_for(Dichotomy d) const;
  int label_of(const DichotomyLabels& labels, Dichotomy d) const;
};

struct CellResult {
  Dichotomy dichotomy = Dichotomy::IE;
  Experiment experiment = Experiment::Baseline;
  bool ok = false;
  std::string error;
  MetricsReport metrics;
  ConfusionMatrix confusion;
  LearningCurve curve;
  std::map<ModelFamily, GridSearchResult> grids;
  std::vector<ModelSpec> stack_bases;
  bool used_stacking = true;
  std::size_t n_train = 0, n_test = 0, n_features = 0;
  ImportanceRanking importance;           // truncated to the top entries
  std::vector<double> scree;              // leading explained-variance ratios
  double cumulative_variance_10 = 0.0;    // share explained by 10 components
  std::map<std::string, double> block_max_correlation;  // per column family
  double wall_ms = 0.0;
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  std::uint64_t seed = 0;
  std::string data_source;
  std::string lexicon_versions;
  std::string timestamp;
  double wall_ms = 0.0;

  const CellResult* cell(Dichotomy d, Experiment e) const;
  bool all_ok() const;
};

ExperimentReport run(const ExperimentConfig& config);

struct AblationReport {
  AblationComponent component = AblationComponent::SentimentBlock;
  ExperimentReport with_component;
  ExperimentReport without_component;
  // per cell, metric-name -> (ablated - original)
  std::vector<std::map<std::string, double>> deltas;
};

AblationReport run_ablation(const ExperimentConfig& config, AblationComponent component);

nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing = true);
void emit_reports(const ExperimentReport& report, const std::filesystem::path& outdir);
nlohmann::json ablation_to_json(const AblationReport& report);

// ------------------------------------------------------------ model bundles

struct DichotomyPipeline {
  Dichotomy dichotomy = Dichotomy::IE;
  Experiment experiment = Experiment::All;
  char positive = 'E';
  TfidfModel tfidf;
  std::vector<std::size_t> selection;
  DenseScaler scaler;
  StackedModel model;
  TermOptions term_options;
};

struct ModelBundle {
  std::uint32_t format_version = 1;
  std::string sentiment_version, aspect_version, grammar_version, lemma_version;
  std::string stopword_source;
  bool scrub_type_mentions = true;
  std::string separator = "|||";
  std::vector<DichotomyPipeline> pipelines;
};

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

// trains one stacked pipeline per requested dichotomy on the full corpus
// (balanced + split internally; the split's training side is used)
ModelBundle train_bundle(const ExperimentConfig& config, Experiment experiment);

struct Prediction {
  std::map<std::string, double> probabilities;  // dichotomy name -> P(positive letter)
  std::map<std::string, char> positive;         // dichotomy name -> positive letter
  HandcraftedFeatures features;
};

// errors when the bundle was built against different lexicon versions
Prediction predict_text(const ModelBundle& bundle, const std::string& text,
                        const std::filesystem::path& resource_dir);

// metrics of every bundle pipeline over a labeled corpus
std::map<std::string, MetricsReport> evaluate_bundle(const ModelBundle& bundle,
                                                     const Corpus& corpus,
                                                     const std::filesystem::path& resource_dir);

}  // namespace mbti
