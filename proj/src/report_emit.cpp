#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "feature_ops.hpp"
#include "mbti/runner.hpp"
#include "mbti/util/csv.hpp"
#include "mbti/util/parallel.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

namespace {

std::string fmt(double v, const char* format = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return {{"family", family_name(spec.family)}, {"params", spec.params}, {"seed", spec.seed}};
}

}  // namespace

nlohmann::json report_to_json(const ExperimentReport& report, bool include_timing) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["data_source"] = report.data_source;
  j["lexicon_versions"] = report.lexicon_versions;
  if (include_timing) {
    j["meta"]["timestamp"] = report.timestamp;
    j["meta"]["wall_ms"] = report.wall_ms;
  }
  j["cells"] = nlohmann::json::array();
  for (const auto& cell : report.cells) {
    nlohmann::json c;
    c["dichotomy"] = dichotomy_name(cell.dichotomy);
    c["experiment"] = experiment_name(cell.experiment);
    c["ok"] = cell.ok;
    if (!cell.ok) {
      c["error"] = cell.error;
      j["cells"].push_back(std::move(c));
      continue;
    }
    for (std::size_t m = 0; m < 10; ++m) {
      c["metrics"][metric_names()[m]] = cell.metrics.values()[m];
    }
    c["confusion"] = {{"tp", cell.confusion.tp},
                      {"fp", cell.confusion.fp},
                      {"fn", cell.confusion.fn},
                      {"tn", cell.confusion.tn}};
    c["n_train"] = cell.n_train;
    c["n_test"] = cell.n_test;
    c["n_features"] = cell.n_features;
    c["used_stacking"] = cell.used_stacking;
    for (const auto& spec : cell.stack_bases) c["stacking"]["bases"].push_back(spec_to_json(spec));
    for (const auto& [family, grid] : cell.grids) {
      nlohmann::json g;
      g["scorer"] = grid.scorer;
      g["best_params"] = grid.best_spec.params;
      g["best_score"] = grid.best_score;
      for (const auto& point : grid.table) {
        nlohmann::json p;
        p["params"] = point.params;
        if (point.failed) {
          p["failed"] = true;
          p["error"] = point.error;
        } else {
          p["fold_scores"] = point.fold_scores;
          p["mean"] = point.mean_score;
        }
        g["table"].push_back(std::move(p));
      }
      c["grid"][family_name(family)] = std::move(g);
    }
    if (!cell.curve.train_sizes.empty()) {
      c["learning_curve"] = {{"train_sizes", cell.curve.train_sizes},
                             {"train_scores", cell.curve.train_scores},
                             {"validation_scores", cell.curve.validation_scores}};
    }
    if (!cell.importance.items.empty()) {
      for (const auto& [name, percent] : cell.importance.items) {
        c["importance"].push_back({{"feature", name}, {"percent", percent}});
      }
      c["scree"] = cell.scree;
      c["cumulative_variance_10"] = cell.cumulative_variance_10;
      c["block_max_correlation"] = cell.block_max_correlation;
    }
    if (include_timing) c["wall_ms"] = cell.wall_ms;
    j["cells"].push_back(std::move(c));
  }
  return j;
}

nlohmann::json ablation_to_json(const AblationReport& report) {
  nlohmann::json j;
  j["component"] = ablation_component_name(report.component);
  j["with_component"] = report_to_json(report.with_component);
  j["without_component"] = report_to_json(report.without_component);
  j["deltas"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.deltas.size(); ++i) {
    nlohmann::json d;
    d["dichotomy"] = dichotomy_name(report.with_component.cells[i].dichotomy);
    d["experiment"] = experiment_name(report.with_component.cells[i].experiment);
    d["ablated_minus_original"] = report.deltas[i];
    j["deltas"].push_back(std::move(d));
  }
  return j;
}

namespace {

// minimal polyline chart; deterministic formatting
std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  const double width = 640, height = 420, ml = 60, mr = 160, mt = 40, mb = 50;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;
  double lo = 0.0, hi = 1.0;
  for (const auto& [name, values] : series) {
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi <= lo) hi = lo + 1.0;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width, "%.0f") +
                    "\" height=\"" + fmt(height, "%.0f") + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml, "%.0f") + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
         title + "</text>\n";
  svg += "<line x1=\"" + fmt(ml, "%.1f") + "\" y1=\"" + fmt(mt, "%.1f") + "\" x2=\"" +
         fmt(ml, "%.1f") + "\" y2=\"" + fmt(mt + plot_h, "%.1f") + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(ml, "%.1f") + "\" y1=\"" + fmt(mt + plot_h, "%.1f") + "\" x2=\"" +
         fmt(ml + plot_w, "%.1f") + "\" y2=\"" + fmt(mt + plot_h, "%.1f") +
         "\" stroke=\"black\"/>\n";
  for (int g = 0; g <= 4; ++g) {
    const double frac = g / 4.0;
    const double yy = mt + plot_h - frac * plot_h;
    svg += "<text x=\"8\" y=\"" + fmt(yy + 4, "%.1f") +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(lo + frac * (hi - lo), "%.2f") +
           "</text>\n";
    svg += "<line x1=\"" + fmt(ml - 4, "%.1f") + "\" y1=\"" + fmt(yy, "%.1f") + "\" x2=\"" +
           fmt(ml, "%.1f") + "\" y2=\"" + fmt(yy, "%.1f") + "\" stroke=\"black\"/>\n";
  }
  const std::size_t n = x_labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xx = ml + (n > 1 ? plot_w * static_cast<double>(i) / (n - 1) : plot_w / 2);
    svg += "<text x=\"" + fmt(xx - 10, "%.1f") + "\" y=\"" + fmt(mt + plot_h + 18, "%.1f") +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + x_labels[i] + "</text>\n";
  }
  std::size_t color = 0;
  for (const auto& [name, values] : series) {
    std::string points;
    for (std::size_t i = 0; i < values.size() && i < n; ++i) {
      const double xx = ml + (n > 1 ? plot_w * static_cast<double>(i) / (n - 1) : plot_w / 2);
      const double yy = mt + plot_h - (values[i] - lo) / (hi - lo) * plot_h;
      points += fmt(xx, "%.1f") + "," + fmt(yy, "%.1f") + " ";
    }
    const char* stroke = palette[color % 10];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"1.5\" points=\"" +
           points + "\"/>\n";
    svg += "<text x=\"" + fmt(ml + plot_w + 10, "%.1f") + "\" y=\"" +
           fmt(mt + 14 * static_cast<double>(color + 1), "%.1f") +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + stroke + "\">" + name +
           "</text>\n";
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

void emit_reports(const ExperimentReport& report, const std::filesystem::path& outdir) {
  if (report.cells.empty()) throw Error("emit_reports: nothing to emit (empty report)");
  std::filesystem::create_directories(outdir);

  write_text_file(outdir / "report.json", report_to_json(report).dump(2) + "\n");

  // group cells per dichotomy, keeping the run order of experiments
  std::vector<Dichotomy> seen;
  for (const auto& cell : report.cells) {
    if (std::find(seen.begin(), seen.end(), cell.dichotomy) == seen.end()) {
      seen.push_back(cell.dichotomy);
    }
  }

  for (Dichotomy d : seen) {
    std::vector<const CellResult*> cells;
    for (const auto& cell : report.cells) {
      if (cell.dichotomy == d) cells.push_back(&cell);
    }
    const std::string dn = dichotomy_name(d);

    // metric table: rows in report order, one column per experiment
    std::string table = "Metrics";
    for (const auto* cell : cells) table += "," + experiment_name(cell->experiment);
    table += "\n";
    for (std::size_t m = 0; m < 10; ++m) {
      table += metric_row_labels()[m];
      for (const auto* cell : cells) {
        table += cell->ok ? "," + fmt(cell->metrics.values()[m]) : ",";
      }
      table += "\n";
    }
    write_text_file(outdir / ("metrics_" + dn + ".csv"), table);

    std::vector<std::string> x_labels;
    std::vector<std::pair<std::string, std::vector<double>>> series(10);
    for (std::size_t m = 0; m < 10; ++m) series[m].first = metric_row_labels()[m];
    for (const auto* cell : cells) {
      if (!cell->ok) continue;
      x_labels.push_back(experiment_name(cell->experiment));
      const auto values = cell->metrics.values();
      for (std::size_t m = 0; m < 10; ++m) series[m].second.push_back(values[m]);
    }
    if (!x_labels.empty()) {
      write_text_file(outdir / ("evolution_" + dn + ".svg"),
                      line_chart_svg("Metric evolution - " + dn, x_labels, series));
    }

    for (const auto* cell : cells) {
      if (!cell->ok) continue;
      const std::string tag = dn + "_" + experiment_name(cell->experiment);
      {
        std::string csv = ",predicted_positive,predicted_negative\n";
        csv += "actual_positive," + std::to_string(cell->confusion.tp) + "," +
               std::to_string(cell->confusion.fn) + "\n";
        csv += "actual_negative," + std::to_string(cell->confusion.fp) + "," +
               std::to_string(cell->confusion.tn) + "\n";
        write_text_file(outdir / ("confusion_" + tag + ".csv"), csv);
      }
      if (!cell->curve.train_sizes.empty()) {
        std::string csv = "train_size,train_score,validation_score\n";
        for (std::size_t i = 0; i < cell->curve.train_sizes.size(); ++i) {
          csv += std::to_string(cell->curve.train_sizes[i]) + "," +
                 fmt(cell->curve.train_scores[i]) + "," + fmt(cell->curve.validation_scores[i]) +
                 "\n";
        }
        write_text_file(outdir / ("learning_curve_" + tag + ".csv"), csv);
        std::vector<std::string> sizes;
        for (std::size_t s : cell->curve.train_sizes) sizes.push_back(std::to_string(s));
        write_text_file(outdir / ("learning_curve_" + tag + ".svg"),
                        line_chart_svg("Learning curve - " + tag, sizes,
                                       {{"train", cell->curve.train_scores},
                                        {"validation", cell->curve.validation_scores}}));
      }
      {
        std::string csv;
        for (const auto& [family, grid] : cell->grids) {
          csv += grid_table_to_csv(family, grid);
        }
        if (!csv.empty()) write_text_file(outdir / ("grid_" + tag + ".csv"), csv);
      }
      if (!cell->importance.items.empty()) {
        std::string csv = "feature,importance_percent\n";
        for (const auto& [name, percent] : cell->importance.items) {
          csv += csv_quote(name) + "," + fmt(percent, "%.4f") + "\n";
        }
        write_text_file(outdir / ("importance_" + tag + ".csv"), csv);
        std::string scree = "component,explained_variance_ratio\n";
        for (std::size_t i = 0; i < cell->scree.size(); ++i) {
          scree += std::to_string(i + 1) + "," + fmt(cell->scree[i], "%.8f") + "\n";
        }
        write_text_file(outdir / ("scree_" + tag + ".csv"), scree);
      }
    }
  }
}

// ------------------------------------------------------------ model bundles

namespace {

constexpr char kBundleMagic[9] = "MBTIBND1";

void write_tfidf(BinaryWriter& w, const TfidfModel& model) {
  w.u64(model.vocabulary.size());
  std::vector<std::string> terms(model.vocabulary.size());
  for (const auto& [term, col] : model.vocabulary) terms[col] = term;
  for (const auto& term : terms) w.str(term);
  std::vector<std::uint32_t> df(model.document_frequency.begin(), model.document_frequency.end());
  w.u32_vec(df);
  w.f64_vec(model.idf);
  w.u64(model.n_docs);
  w.u64(model.config.max_features);
  w.u64(model.config.min_df);
  w.u8(model.config.sublinear_tf ? 1 : 0);
}

TfidfModel read_tfidf(BinaryReader& r) {
  TfidfModel model;
  const std::uint64_t n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    model.vocabulary.emplace(r.str(), static_cast<std::uint32_t>(i));
  }
  const auto df = r.u32_vec();
  model.document_frequency.assign(df.begin(), df.end());
  model.idf = r.f64_vec();
  model.n_docs = r.u64();
  model.config.max_features = r.u64();
  model.config.min_df = r.u64();
  model.config.sublinear_tf = r.u8() != 0;
  return model;
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format_version"] = bundle.format_version;
  header["sentiment_version"] = bundle.sentiment_version;
  header["aspect_version"] = bundle.aspect_version;
  header["grammar_version"] = bundle.grammar_version;
  header["lemma_version"] = bundle.lemma_version;
  header["stopword_source"] = bundle.stopword_source;
  header["scrub_type_mentions"] = bundle.scrub_type_mentions;
  header["separator"] = bundle.separator;
  header["pipelines"] = nlohmann::json::array();
  for (const auto& p : bundle.pipelines) {
    header["pipelines"].push_back({{"dichotomy", dichotomy_name(p.dichotomy)},
                                   {"experiment", experiment_name(p.experiment)},
                                   {"positive", std::string(1, p.positive)},
                                   {"selection", p.selection},
                                   {"remove_stopwords", p.term_options.remove_stopwords},
                                   {"use_lemmas", p.term_options.use_lemmas}});
  }
  const std::string header_text = header.dump();

  BinaryWriter w;
  w.str(header_text);
  for (const auto& p : bundle.pipelines) {
    write_tfidf(w, p.tfidf);
    w.f64_vec(p.scaler.mean);
    w.f64_vec(p.scaler.scale);
    serialize_stacked(w, p.model);
  }
  write_text_file(path, std::string(kBundleMagic) + w.buffer());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  const std::string blob = read_text_file(path);
  const std::size_t magic_len = std::strlen(kBundleMagic);
  if (blob.size() < magic_len || blob.compare(0, magic_len, kBundleMagic) != 0) {
    throw FormatError("not a model bundle: " + path.string());
  }
  BinaryReader r(std::string_view(blob).substr(magic_len));
  const nlohmann::json header = nlohmann::json::parse(r.str());

  ModelBundle bundle;
  bundle.format_version = header.at("format_version").get<std::uint32_t>();
  bundle.sentiment_version = header.at("sentiment_version").get<std::string>();
  bundle.aspect_version = header.at("aspect_version").get<std::string>();
  bundle.grammar_version = header.at("grammar_version").get<std::string>();
  bundle.lemma_version = header.at("lemma_version").get<std::string>();
  bundle.stopword_source = header.at("stopword_source").get<std::string>();
  bundle.scrub_type_mentions = header.at("scrub_type_mentions").get<bool>();
  bundle.separator = header.at("separator").get<std::string>();
  for (const auto& pj : header.at("pipelines")) {
    DichotomyPipeline p;
    p.dichotomy = dichotomy_from_name(pj.at("dichotomy").get<std::string>());
    p.experiment = experiment_from_name(pj.at("experiment").get<std::string>());
    p.positive = pj.at("positive").get<std::string>().at(0);
    p.selection = pj.at("selection").get<std::vector<std::size_t>>();
    p.term_options.remove_stopwords = pj.at("remove_stopwords").get<bool>();
    p.term_options.use_lemmas = pj.at("use_lemmas").get<bool>();
    p.tfidf = read_tfidf(r);
    p.scaler.mean = r.f64_vec();
    p.scaler.scale = r.f64_vec();
    p.model = deserialize_stacked(r);
    bundle.pipelines.push_back(std::move(p));
  }
  return bundle;
}

ModelBundle train_bundle(const ExperimentConfig& config, Experiment experiment) {
  const Corpus corpus = load_corpus(config.data_path, config.separator);
  const LexiconBundle lexicons = load_lexicon_bundle(config.resource_dir);
  const StopwordList stopwords = load_stopwords(config.resource_dir / "stopwords.txt");
  const LemmaTable lemmas = load_lemma_table(config.resource_dir / "lemma_exceptions.json");
  const GridSet grids = [&] {
    GridSet set = default_grid_set();
    if (!config.grid_path.empty()) {
      for (const auto& [family, grid] : parse_grid_set(read_text_file(config.grid_path))) {
        set[family] = grid;
      }
    }
    return set;
  }();

  ModelBundle bundle;
  bundle.sentiment_version = lexicons.sentiment.version;
  bundle.aspect_version = lexicons.aspects.version;
  bundle.grammar_version = lexicons.grammar.version;
  bundle.lemma_version = lemmas.version;
  bundle.stopword_source = stopwords.source;
  bundle.scrub_type_mentions = config.scrub_type_mentions;
  bundle.separator = config.separator;

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
    popts.do_clean = true;
    popts.scrub_type_mentions = config.scrub_type_mentions;
    std::vector<ProcessedDoc> docs(parts.train.records.size());
    parallel_for(docs.size(), [&](std::size_t i) {
      docs[i] = preprocess(parts.train.records[i], lemmas, popts);
    });
    std::vector<HandcraftedFeatures> hc(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) { hc[i] = analyze_all(docs[i], lexicons); });

    DichotomyPipeline pipe;
    pipe.dichotomy = d;
    pipe.experiment = experiment;
    pipe.positive = config.positive_for(d);
    pipe.selection = experiment_selection(experiment);
    std::vector<TermList> terms(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      terms[i] = tfidf_terms(docs[i], stopwords, pipe.term_options);
    }
    pipe.tfidf = fit_tfidf(terms, config.tfidf);
    std::vector<SparseRow> rows(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) rows[i] = transform(pipe.tfidf, terms[i]);
    pipe.scaler = fit_scaler(hc, pipe.selection);
    const FeatureMatrix x_train = assemble(rows, hc, pipe.selection, pipe.scaler, pipe.tfidf);
    std::vector<int> y;
    for (const auto& rec : parts.train.records) y.push_back(config.label_of(rec.labels, d));

    std::vector<ModelSpec> base_specs;
    for (ModelFamily family : config.families) {
      base_specs.push_back(grid_search(family, grids.at(family), x_train, y, config.folds,
                                       config.scorer, derive_seed(cell_seed, "grid"))
                               .best_spec);
    }
    if (base_specs.size() >= 2) {
      pipe.model = fit_stacking(base_specs, default_final_spec(), x_train, y, config.folds,
                                derive_seed(cell_seed, "stack"));
    } else {
      // degenerate single-family bundle: stack the same base twice
      base_specs.push_back(base_specs.front());
      pipe.model = fit_stacking(base_specs, default_final_spec(), x_train, y, config.folds,
                                derive_seed(cell_seed, "stack"));
    }
    bundle.pipelines.push_back(std::move(pipe));
  }
  return bundle;
}

namespace {

struct PredictResources {
  LexiconBundle lexicons;
  StopwordList stopwords;
  LemmaTable lemmas;
};

PredictResources check_versions(const ModelBundle& bundle,
                                const std::filesystem::path& resource_dir) {
  PredictResources res;
  res.lexicons = load_lexicon_bundle(resource_dir);
  res.stopwords = load_stopwords(resource_dir / "stopwords.txt");
  res.lemmas = load_lemma_table(resource_dir / "lemma_exceptions.json");
  auto mismatch = [](const std::string& what, const std::string& got, const std::string& want) {
    throw Error("lexicon version mismatch for " + what + ": bundle was built with `" + want +
                "`, current resources are `" + got + "`");
  };
  if (res.lexicons.sentiment.version != bundle.sentiment_version) {
    mismatch("sentiment lexicon", res.lexicons.sentiment.version, bundle.sentiment_version);
  }
  if (res.lexicons.aspects.version != bundle.aspect_version) {
    mismatch("aspect lexicon", res.lexicons.aspects.version, bundle.aspect_version);
  }
  if (res.lexicons.grammar.version != bundle.grammar_version) {
    mismatch("grammar rules", res.lexicons.grammar.version, bundle.grammar_version);
  }
  if (res.lemmas.version != bundle.lemma_version) {
    mismatch("lemma table", res.lemmas.version, bundle.lemma_version);
  }
  return res;
}

std::vector<std::string> split_posts(const std::string& text, const std::string& separator) {
  std::vector<std::string> posts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(separator, start);
    if (pos == std::string::npos) {
      posts.push_back(text.substr(start));
      break;
    }
    posts.push_back(text.substr(start, pos - start));
    start = pos + separator.size();
  }
  return posts;
}

}  // namespace

Prediction predict_text(const ModelBundle& bundle, const std::string& text,
                        const std::filesystem::path& resource_dir) {
  const PredictResources res = check_versions(bundle, resource_dir);

  PreprocessOptions popts;
  popts.do_clean = true;
  popts.scrub_type_mentions = bundle.scrub_type_mentions;
  const ProcessedDoc doc = preprocess(split_posts(text, bundle.separator), res.lemmas, popts);

  Prediction out;
  out.features = analyze_all(doc, res.lexicons);
  for (const auto& pipe : bundle.pipelines) {
    const SparseRow row = transform(pipe.tfidf, tfidf_terms(doc, res.stopwords, pipe.term_options));
    const FeatureMatrix x =
        assemble({row}, {out.features}, pipe.selection, pipe.scaler, pipe.tfidf);
    const double p = predict_stacking(pipe.model, x).front();
    out.probabilities[dichotomy_name(pipe.dichotomy)] = p;
    out.positive[dichotomy_name(pipe.dichotomy)] = pipe.positive;
  }
  return out;
}

std::map<std::string, MetricsReport> evaluate_bundle(const ModelBundle& bundle,
                                                     const Corpus& corpus,
                                                     const std::filesystem::path& resource_dir) {
  const PredictResources res = check_versions(bundle, resource_dir);
  PreprocessOptions popts;
  popts.do_clean = true;
  popts.scrub_type_mentions = bundle.scrub_type_mentions;
  std::vector<ProcessedDoc> docs(corpus.records.size());
  parallel_for(docs.size(), [&](std::size_t i) {
    docs[i] = preprocess(corpus.records[i], res.lemmas, popts);
  });
  std::vector<HandcraftedFeatures> hc(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { hc[i] = analyze_all(docs[i], res.lexicons); });

  std::map<std::string, MetricsReport> reports;
  for (const auto& pipe : bundle.pipelines) {
    std::vector<SparseRow> rows(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
      rows[i] = transform(pipe.tfidf, tfidf_terms(docs[i], res.stopwords, pipe.term_options));
    }
    const FeatureMatrix x = assemble(rows, hc, pipe.selection, pipe.scaler, pipe.tfidf);
    const auto probs = predict_stacking(pipe.model, x);
    std::vector<int> pred(probs.size()), y;
    for (std::size_t i = 0; i < probs.size(); ++i) pred[i] = label_from_probability(probs[i]);
    const bool positive_is_first = pipe.positive == dichotomy_first_letter(pipe.dichotomy);
    for (const auto& rec : corpus.records) {
      y.push_back(rec.labels.first_of(pipe.dichotomy) == positive_is_first ? 1 : 0);
    }
    reports[dichotomy_name(pipe.dichotomy)] = full_report(y, pred, probs, 1);
  }
  return reports;
}

}  // namespace mbti
