#include "newsent/csv.hpp"
#include "newsent/figures.hpp"
#include "newsent/metrics.hpp"
#include "newsent/ngram.hpp"
#include "newsent/pipeline.hpp"
#include "newsent/textprep.hpp"
#include "newsent/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>

namespace newsent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ArticleSchema canonical_schema() {
    ArticleSchema s;
    s.id = "id";
    s.date = "date";
    s.section = "section";
    s.title = "title";
    s.body = "body";
    return s;
}

std::string articles_csv(const std::vector<Article>& arts) {
    CsvWriter w;
    w.write_row({"id", "date", "section", "title", "body"});
    for (const auto& a : arts)
        w.write_row({a.id, a.publication_date.to_string(), a.section, a.title, a.body});
    return w.str();
}

std::string senwave_csv(const std::vector<LabeledTweet>& rows) {
    SenwaveSchema schema;
    CsvWriter w;
    std::vector<std::string> fields{schema.text};
    fields.insert(fields.end(), schema.label_columns.begin(), schema.label_columns.end());
    w.write_row(fields);
    for (const auto& r : rows) {
        fields.assign(1, r.text);
        for (std::size_t i = 0; i < kNumLabels; ++i)
            fields.push_back(r.labels[i] ? "1" : "0");
        w.write_row(fields);
    }
    return w.str();
}

std::string distribution_csv(const LabelCounts& counts, bool omit_official_report) {
    CsvWriter w;
    w.write_row({"label", "count"});
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (omit_official_report && Sentiment(i) == Sentiment::official_report) continue;
        w.write_row({std::string(kLabelNames[i]), std::to_string(counts[i])});
    }
    return w.str();
}

RunManifest start(const std::string& command, const AppConfig& cfg, std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.config = cfg.to_json();
    m.seed = seed;
    return m;
}

void note_input(RunManifest& m, const fs::path& p) {
    m.inputs[p.generic_string()] = file_fingerprint(p);
}

void emit(RunManifest& m, const fs::path& run_dir, const std::string& rel,
          std::string_view content) {
    write_file(run_dir / rel, content);
    m.artifacts.push_back(rel);
}

// The manifest itself lands where manifest_dir points; report uses the
// figures/ subdirectory so it never clobbers the manifest of the run it
// reads from.
void finish(RunManifest& m, const fs::path& run_dir, const fs::path& manifest_dir) {
    m.created = created_stamp();
    std::string rel = fs::relative(manifest_dir / "manifest.json", run_dir).generic_string();
    m.artifacts.push_back(rel);
    write_file(manifest_dir / "manifest.json", m.to_json());
}

DateWindow window_from_config(const IngestConfig& cfg) {
    auto b = CalDate::parse(cfg.begin);
    auto e = CalDate::parse(cfg.end);
    if (!b) fail_config("ingest.begin is not a date: " + cfg.begin);
    if (!e) fail_config("ingest.end is not a date: " + cfg.end);
    if (*e < *b) fail_config("ingest window ends before it begins");
    return DateWindow{*b, *e};
}

std::vector<Article> load_cleaned_articles(const fs::path& p) {
    return load_articles(p, canonical_schema());
}

std::vector<Prediction> load_predictions(const fs::path& p) {
    return predictions_from_jsonl(read_file(p), p.string());
}

const fs::path& require_analysis_articles(const AppConfig& cfg, fs::path& storage) {
    if (cfg.analysis.articles.empty())
        fail_config("analysis.articles is not set (pass --articles or set it in the config)");
    storage = cfg.analysis.articles;
    return storage;
}

} // namespace

RunManifest run_ingest(const AppConfig& cfg, const fs::path& articles, const fs::path& schema_json,
                       const fs::path& run_dir) {
    RunManifest m = start("ingest", cfg, 0);

    ArticleSchema schema;
    if (!schema_json.empty()) {
        note_input(m, schema_json);
        json j;
        try {
            j = json::parse(read_file(schema_json));
        } catch (const json::exception& e) {
            fail_data("schema file " + schema_json.string() + ": " + e.what());
        }
        if (!j.is_object()) fail_config("schema file must hold a JSON object");
        for (auto& [key, val] : j.items()) {
            if (!val.is_string()) fail_config("schema." + key + " must be a string");
            std::string v = val.get<std::string>();
            if (key == "id") schema.id = v;
            else if (key == "date") schema.date = v;
            else if (key == "section") schema.section = v;
            else if (key == "title") schema.title = v;
            else if (key == "body") schema.body = v;
            else fail_config("unknown schema key: " + key);
        }
    }

    note_input(m, articles);
    ArticleLoadStats stats;
    std::vector<Article> all = load_articles(articles, schema, &stats);
    std::vector<Article> kept = filter_articles(all, cfg.ingest.sections, window_from_config(cfg.ingest));

    emit(m, run_dir, "articles.csv", articles_csv(kept));
    json s = {
        {"rows", stats.rows},
        {"loaded", stats.loaded},
        {"skipped_bad_date", stats.skipped_bad_date},
        {"skipped_empty_body", stats.skipped_empty_body},
        {"kept_after_filter", kept.size()},
    };
    emit(m, run_dir, "stats.json", s.dump(2) + "\n");
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_clean(const AppConfig& cfg, const fs::path& in, const fs::path& out,
                      const fs::path& run_dir) {
    RunManifest m = start("clean", cfg, 0);
    note_input(m, in);

    CleanLexicons lex = CleanLexicons::load(cfg.clean.data_dir);
    std::vector<Article> arts = load_cleaned_articles(in);
    for (auto& a : arts) {
        a.title = clean_for_model(a.title, lex);
        a.body = clean_for_model(a.body, lex);
    }

    std::string csv = articles_csv(arts);
    if (out.empty()) {
        emit(m, run_dir, "cleaned.csv", csv);
    } else {
        write_file(out, csv);
        m.artifacts.push_back(out.generic_string());
    }
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_ngrams(const AppConfig& cfg, const std::string& section, const std::string& quarter,
                       int n, std::size_t k, const std::vector<Sentiment>& labels,
                       const fs::path& predictions, const fs::path& run_dir) {
    RunManifest m = start("ngrams", cfg, 0);
    if (n != 2 && n != 3) fail_config("--n must be 2 or 3");
    if (k == 0) fail_config("--k must be positive");
    if (cfg.ngrams.articles.empty())
        fail_config("ngrams.articles is not set (pass --articles or set it in the config)");

    fs::path articles = cfg.ngrams.articles;
    note_input(m, articles);
    std::vector<Article> arts = load_cleaned_articles(articles);

    std::vector<std::string> sections;
    if (!section.empty()) sections.push_back(section);
    DateWindow window{CalDate{1, 1, 1}, CalDate{9999, 12, 31}};
    arts = filter_articles(arts, sections, window);
    if (!quarter.empty()) {
        auto q = Quarter::parse(quarter);
        if (!q) fail_config("--quarter must look like 2020-Q1, got: " + quarter);
        std::erase_if(arts, [&](const Article& a) {
            return Quarter::from_date(a.publication_date) != *q;
        });
    }

    StopwordPolicy policy =
        StopwordPolicy::from_data_dir(cfg.clean.data_dir, cfg.ngrams.extra_stopwords);

    NGramTable table;
    if (labels.empty()) {
        std::vector<std::vector<std::string>> docs;
        docs.reserve(arts.size());
        for (const auto& a : arts) docs.push_back(tokenize_for_ngrams(a.body, policy));
        table = top_k(docs, n, k);
    } else {
        if (predictions.empty())
            fail_config("--labels needs --predictions to know each article's labels");
        note_input(m, predictions);
        std::unordered_map<std::string, LabelVector> pred_map;
        for (const auto& p : load_predictions(predictions)) pred_map[p.article_id] = p.labels;
        std::vector<std::pair<std::string, std::vector<std::string>>> docs;
        docs.reserve(arts.size());
        for (const auto& a : arts) docs.emplace_back(a.id, tokenize_for_ngrams(a.body, policy));
        table = sentiment_conditioned_ngrams(pred_map, docs, labels, n, k);
    }

    emit(m, run_dir, "ngrams.csv", table.to_csv());
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_train(const AppConfig& cfg, const fs::path& dataset, const fs::path& pretrained_dir,
                      const fs::path& run_dir) {
    RunManifest m = start("train", cfg, cfg.train.train.seed);
    if (dataset.empty())
        fail_config("train.dataset is not set (pass --dataset or set it in the config)");
    note_input(m, dataset);

    CleanLexicons lex = CleanLexicons::load(cfg.clean.data_dir);
    std::vector<LabeledTweet> rows = load_senwave(dataset, SenwaveSchema{}, lex);
    if (cfg.train.max_rows > 0)
        rows = stratified_subset(rows, cfg.train.max_rows, cfg.train.train.seed);
    auto [train_set, test_set] = split_dataset(rows, cfg.train.split_ratio, cfg.train.train.seed);

    const TrainConfig& tc = cfg.train.train;
    Model model = [&] {
        if (tc.family == EncoderFamily::mini) {
            std::vector<std::string> texts;
            texts.reserve(train_set.size());
            for (const auto& r : train_set) texts.push_back(r.text);
            SubwordTokenizer tok =
                SubwordTokenizer::wordpiece_from_corpus(texts, cfg.train.vocab_budget);
            EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
            return Model(tc, ec, std::move(tok));
        }
        if (pretrained_dir.empty())
            fail_env(std::string("no pretrained checkpoint for ") +
                     encoder_family_name(tc.family) +
                     ": pass --pretrained or set the checkpoint environment variable");
        note_input(m, pretrained_dir / "manifest.json");
        return Model::from_pretrained(pretrained_dir, tc);
    }();

    TrainTrace trace = model.train(train_set);
    model.save(run_dir / "model");
    m.artifacts.push_back("model");

    json tj = {
        {"epoch_mean_loss", trace.epoch_mean_loss},
        {"train_rows", train_set.size()},
        {"test_rows", test_set.size()},
        {"train_fingerprint", model.dataset_fingerprint()},
    };
    emit(m, run_dir, "trace.json", tj.dump(2) + "\n");
    emit(m, run_dir, "test_split.csv", senwave_csv(test_set));
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_evaluate(const AppConfig& cfg, const fs::path& model_dir, const fs::path& test,
                         const fs::path& run_dir) {
    RunManifest m = start("evaluate", cfg, 0);
    fs::path resolved = resolve_model_dir(model_dir);
    note_input(m, resolved / "manifest.json");
    note_input(m, test);

    Model model = Model::load(resolved);
    CleanLexicons lex = CleanLexicons::load(cfg.clean.data_dir);
    std::vector<LabeledTweet> test_set = load_senwave(test, SenwaveSchema{}, lex);

    EvalConfig ec;
    ec.threshold = model.train_config().threshold;
    MetricsReport report = evaluate(model, test_set, ec);
    // Best-constant-in-hindsight floor: prevalence fitted on the same rows it
    // scores, so beating it means the model learned something per-sample.
    MetricsReport floor = constant_prevalence_report(test_set, test_set, ec.threshold);

    emit(m, run_dir, "metrics.json", report.to_json());
    emit(m, run_dir, "comparison.csv", metrics_comparison_csv({report, floor}));
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_predict(const AppConfig& cfg, const fs::path& model_dir, const fs::path& articles,
                        const fs::path& run_dir) {
    RunManifest m = start("predict", cfg, 0);
    fs::path resolved = resolve_model_dir(model_dir);
    note_input(m, resolved / "manifest.json");
    note_input(m, articles);

    Model model = Model::load(resolved);
    std::vector<Article> arts = load_cleaned_articles(articles);

    std::vector<Prediction> preds;
    preds.reserve(arts.size());
    for (const auto& a : arts) {
        Prediction p = model.predict_document(a.id, a.body, cfg.predict.stride);
        p.labels = threshold_scores(p.scores, cfg.predict.threshold);
        preds.push_back(std::move(p));
    }

    emit(m, run_dir, "predictions.jsonl", predictions_to_jsonl(preds));
    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_polarity(const AppConfig& cfg, const fs::path& predictions,
                         const fs::path& weights_json, const fs::path& run_dir) {
    RunManifest m = start("polarity", cfg, 0);
    note_input(m, predictions);
    std::vector<Prediction> preds = load_predictions(predictions);

    PolarityWeights weights = cfg.analysis.weights;
    if (!weights_json.empty()) {
        note_input(m, weights_json);
        weights = weights_from_json(read_file(weights_json), weights_json.string());
    }

    {
        CsvWriter w;
        w.write_row({"article_id", "polarity"});
        for (const auto& p : preds)
            w.write_row({p.article_id, fmt_double(polarity_score(p.labels, weights))});
        emit(m, run_dir, "article_polarity.csv", w.str());
    }

    emit(m, run_dir, "distribution.csv",
         distribution_csv(sentiment_distribution(preds, false), false));
    emit(m, run_dir, "distribution_no_official.csv",
         distribution_csv(sentiment_distribution(preds, true), true));

    if (preds.size() >= 2) {
        emit(m, run_dir, "cooccurrence.csv", cooccurrence_csv(cooccurrence_matrix(preds)));
    } else {
        std::fprintf(stderr, "polarity: skipping cooccurrence.csv (needs at least 2 predictions)\n");
    }

    if (!cfg.analysis.articles.empty()) {
        fs::path articles = cfg.analysis.articles;
        note_input(m, articles);
        std::vector<Article> arts = load_cleaned_articles(articles);
        emit(m, run_dir, "quarterly.csv", quarterly_csv(quarterly_aggregate(preds, arts, weights)));

        std::unordered_map<std::string, const Article*> by_id;
        for (const auto& a : arts) by_id[a.id] = &a;
        DateWindow pre = DateWindow::pre_pandemic(), during = DateWindow::pandemic();
        std::vector<Prediction> pre_preds, during_preds;
        for (const auto& p : preds) {
            auto it = by_id.find(p.article_id);
            if (it == by_id.end()) fail_data("prediction for unknown article id: " + p.article_id);
            if (pre.contains(it->second->publication_date)) pre_preds.push_back(p);
            else if (during.contains(it->second->publication_date)) during_preds.push_back(p);
        }
        emit(m, run_dir, "distribution_pre.csv",
             distribution_csv(sentiment_distribution(pre_preds, false), false));
        emit(m, run_dir, "distribution_during.csv",
             distribution_csv(sentiment_distribution(during_preds, false), false));
    }

    finish(m, run_dir, run_dir);
    return m;
}

RunManifest run_timeseries(const AppConfig& cfg, const fs::path& predictions,
                           const fs::path& deaths, const std::string& region,
                           const fs::path& run_dir) {
    RunManifest m = start("timeseries", cfg, 0);
    note_input(m, predictions);
    note_input(m, deaths);
    fs::path articles;
    require_analysis_articles(cfg, articles);
    note_input(m, articles);

    std::vector<Prediction> preds = load_predictions(predictions);
    std::vector<Article> arts = load_cleaned_articles(articles);
    std::vector<QuarterlySentiment> quarterly =
        quarterly_aggregate(preds, arts, cfg.analysis.weights);
    DeathSeries series = load_death_series(deaths, region);
    DeathAlignment align = align_with_deaths(quarterly, series, cfg.analysis.negative_labels);
    if (!align.warning.empty()) std::fprintf(stderr, "timeseries: %s\n", align.warning.c_str());

    CsvWriter w;
    w.write_row({"quarter", "article_count", "negative_label_count", "deaths"});
    for (const auto& r : align.rows)
        w.write_row({r.quarter.to_string(), std::to_string(r.article_count),
                     std::to_string(r.negative_label_count), std::to_string(r.deaths)});
    emit(m, run_dir, "deaths_alignment.csv", w.str());

    json aj = {
        {"region", align.region},
        {"correlation", align.correlation ? json(*align.correlation) : json(nullptr)},
        {"warning", align.warning},
    };
    emit(m, run_dir, "alignment.json", aj.dump(2) + "\n");
    finish(m, run_dir, run_dir);
    return m;
}

namespace {

// ---- report: rebuild figures from whatever tables the run directory holds ----

bool table_ready(const fs::path& p, const char* what) {
    if (!fs::exists(p)) return false;
    CsvTable t = CsvTable::from_file(p);
    if (t.num_rows() > 0) return true;
    std::fprintf(stderr, "report: skipping %s (empty table)\n", what);
    return false;
}

void emit_figure(RunManifest& m, const fs::path& run_dir, const std::string& stem,
                 const Figure& fig, bool raster) {
    std::string svg_rel = "figures/" + stem + ".svg";
    write_file(run_dir / svg_rel, fig.svg());
    m.artifacts.push_back(svg_rel);
    if (raster) {
        std::string png_rel = "figures/" + stem + ".png";
        auto png = fig.png();
        write_file(run_dir / png_rel,
                   std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
        m.artifacts.push_back(png_rel);
    }
}

std::vector<double> distribution_values(const CsvTable& t,
                                        const std::vector<std::string>& categories) {
    std::size_t lc = t.require_column("label"), cc = t.require_column("count");
    std::map<std::string, double> by_label;
    for (std::size_t i = 0; i < t.num_rows(); ++i)
        by_label[t.cell(i, lc)] = parse_double(t.cell(i, cc)).value_or(0.0);
    std::vector<double> out;
    out.reserve(categories.size());
    for (const auto& c : categories) out.push_back(by_label.count(c) ? by_label[c] : 0.0);
    return out;
}

} // namespace

RunManifest run_report(const AppConfig& cfg, const fs::path& run_dir) {
    RunManifest m = start("report", cfg, 0);
    if (!fs::is_directory(run_dir)) fail_data("report: not a run directory: " + run_dir.string());
    fs::create_directories(run_dir / "figures");
    bool raster = cfg.report.raster;
    bool rendered_any = false;

    if (fs::path p = run_dir / "ngrams.csv"; table_ready(p, "ngrams.csv")) {
        note_input(m, p);
        CsvTable t = CsvTable::from_file(p);
        std::size_t gc = t.require_column("gram"), cc = t.require_column("count");
        std::vector<BarItem> items;
        for (std::size_t i = 0; i < t.num_rows(); ++i)
            items.push_back({t.cell(i, gc), parse_double(t.cell(i, cc)).value_or(0.0)});
        emit_figure(m, run_dir, "ngrams", bar_chart("Most frequent n-grams", items), raster);
        rendered_any = true;
    }

    {
        fs::path pre = run_dir / "distribution_pre.csv";
        fs::path dur = run_dir / "distribution_during.csv";
        if (table_ready(pre, "distribution_pre.csv") &&
            table_ready(dur, "distribution_during.csv")) {
            note_input(m, pre);
            note_input(m, dur);
            GroupedBars data;
            for (auto name : kLabelNames) data.categories.emplace_back(name);
            data.name_a = "pre-pandemic";
            data.name_b = "pandemic";
            data.a = distribution_values(CsvTable::from_file(pre), data.categories);
            data.b = distribution_values(CsvTable::from_file(dur), data.categories);
            emit_figure(m, run_dir, "distribution_shift",
                        grouped_bar_chart("Sentiment before and during the pandemic", data),
                        raster);
            rendered_any = true;
        }
    }

    if (fs::path p = run_dir / "quarterly.csv"; table_ready(p, "quarterly.csv")) {
        note_input(m, p);
        CsvTable t = CsvTable::from_file(p);
        std::size_t qc = t.require_column("quarter"), sc = t.require_column("section"),
                    mc = t.require_column("mean_polarity");
        std::set<std::string> quarters;
        for (std::size_t i = 0; i < t.num_rows(); ++i) quarters.insert(t.cell(i, qc));
        std::vector<std::string> x(quarters.begin(), quarters.end()); // "YYYY-Qn" sorts right
        std::map<std::string, std::vector<double>> by_section;
        for (std::size_t i = 0; i < t.num_rows(); ++i) {
            auto& vals = by_section[t.cell(i, sc)];
            if (vals.empty()) vals.assign(x.size(), 0.0);
            auto pos = std::lower_bound(x.begin(), x.end(), t.cell(i, qc)) - x.begin();
            vals[std::size_t(pos)] = parse_double(t.cell(i, mc)).value_or(0.0);
        }
        std::vector<LineSeries> series;
        for (auto& [name, vals] : by_section) series.push_back({name, std::move(vals)});
        emit_figure(m, run_dir, "polarity_timeline",
                    line_chart("Mean polarity by quarter", x, series), raster);
        rendered_any = true;
    }

    if (fs::path p = run_dir / "cooccurrence.csv"; table_ready(p, "cooccurrence.csv")) {
        note_input(m, p);
        CsvTable t = CsvTable::from_file(p);
        std::vector<std::string> labels;
        for (auto name : kLabelNames) labels.emplace_back(name);
        std::vector<std::vector<double>> values;
        for (std::size_t i = 0; i < t.num_rows() && i < kNumLabels; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < kNumLabels; ++j) {
                std::size_t col = t.require_column(labels[j]);
                row.push_back(parse_double(t.cell(i, col)).value_or(0.0));
            }
            values.push_back(std::move(row));
        }
        emit_figure(m, run_dir, "cooccurrence", heatmap("Label co-occurrence (phi)", labels, values),
                    raster);
        rendered_any = true;
    }

    if (fs::path p = run_dir / "deaths_alignment.csv"; table_ready(p, "deaths_alignment.csv")) {
        note_input(m, p);
        CsvTable t = CsvTable::from_file(p);
        std::size_t qc = t.require_column("quarter"), ac = t.require_column("article_count"),
                    dc = t.require_column("deaths");
        DualAxisData data;
        data.bars_name = "articles";
        data.line_name = "deaths";
        for (std::size_t i = 0; i < t.num_rows(); ++i) {
            data.x_labels.push_back(t.cell(i, qc));
            data.bars.push_back(parse_double(t.cell(i, ac)).value_or(0.0));
            data.line.push_back(parse_double(t.cell(i, dc)).value_or(0.0));
        }
        emit_figure(m, run_dir, "deaths_alignment",
                    dual_axis_chart("Article volume against reported deaths", data), raster);
        rendered_any = true;
    }

    if (!rendered_any)
        std::fprintf(stderr, "report: no renderable tables in %s\n", run_dir.string().c_str());
    finish(m, run_dir, run_dir / "figures");
    return m;
}

RunManifest run_sample(const AppConfig& cfg, const fs::path& predictions,
                       const std::vector<Sentiment>& labels, std::size_t k, std::uint64_t seed,
                       const fs::path& run_dir) {
    RunManifest m = start("sample", cfg, seed);
    note_input(m, predictions);
    fs::path articles;
    require_analysis_articles(cfg, articles);
    note_input(m, articles);

    std::vector<Prediction> preds = load_predictions(predictions);
    std::vector<Article> arts = load_cleaned_articles(articles);
    SampleResult result = sample_articles(preds, arts, labels, k, seed);
    if (!result.warning.empty()) std::fprintf(stderr, "sample: %s\n", result.warning.c_str());

    emit(m, run_dir, "sample.csv", sample_csv(result));
    finish(m, run_dir, run_dir);
    return m;
}

} // namespace newsent
