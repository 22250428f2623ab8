#include "newsent/pipeline.hpp"
#include "newsent/util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace newsent {

namespace fs = std::filesystem;

namespace {

std::vector<Sentiment> parse_labels_flag(const std::string& csv) {
    std::vector<Sentiment> out;
    if (csv.empty()) return out;
    for (const auto& part : split(csv, ',')) {
        std::string name(trim(part));
        auto s = parse_label(name);
        if (!s) fail_config("unknown label: " + name);
        out.push_back(*s);
    }
    return out;
}

void print_manifest(const RunManifest& m, const fs::path& run_dir) {
    std::printf("run directory: %s\n", run_dir.generic_string().c_str());
    for (const auto& a : m.artifacts) std::printf("  %s\n", a.c_str());
}

int exit_code_of(ErrorClass cls) {
    switch (cls) {
    case ErrorClass::config: return 3;
    case ErrorClass::data: return 4;
    case ErrorClass::environment: return 5;
    case ErrorClass::internal: return 1;
    }
    return 1;
}

} // namespace

int cli(std::vector<std::string> args) {
    CLI::App app{"newspaper sentiment analysis pipeline"};
    app.require_subcommand(1);

    std::string config_path, run_dir_flag, data_dir;

    std::string in_articles, in_schema, in_begin, in_end;
    std::vector<std::string> in_sections;
    auto* ingest = app.add_subcommand("ingest", "load an article dump into the canonical table");
    ingest->add_option("--articles", in_articles, "article dump CSV")->required();
    ingest->add_option("--schema", in_schema, "JSON column-name mapping");
    ingest->add_option("--section", in_sections, "keep only these sections (repeatable)");
    ingest->add_option("--begin", in_begin, "window start, YYYY-MM-DD");
    ingest->add_option("--end", in_end, "window end, YYYY-MM-DD");

    std::string cl_in, cl_out;
    auto* clean = app.add_subcommand("clean", "normalize article text for the classifier");
    clean->add_option("--in", cl_in, "canonical articles CSV")->required();
    clean->add_option("--out", cl_out, "output path (default: cleaned.csv in the run directory)");

    std::string ng_section, ng_quarter, ng_labels, ng_articles, ng_predictions;
    int ng_n = 2;
    std::size_t ng_k = 10;
    bool ng_no_extras = false;
    auto* ngrams = app.add_subcommand("ngrams", "top n-gram table for a section and quarter");
    ngrams->add_option("--section", ng_section, "section filter");
    ngrams->add_option("--quarter", ng_quarter, "quarter filter, YYYY-Qn");
    ngrams->add_option("--n", ng_n, "gram size, 2 or 3");
    ngrams->add_option("--k", ng_k, "table size");
    ngrams->add_option("--labels", ng_labels, "restrict to articles predicted with these labels");
    ngrams->add_option("--articles", ng_articles, "cleaned articles CSV");
    ngrams->add_option("--predictions", ng_predictions, "predictions JSONL (needed with --labels)");
    ngrams->add_flag("--no-extra-stopwords", ng_no_extras, "keep domain stop-words in the grams");

    std::string tr_dataset, tr_encoder, tr_pretrained, tr_kernels;
    int tr_epochs = 0, tr_batch = 0, tr_maxseq = 0;
    double tr_lr = 0, tr_split = 0;
    std::uint64_t tr_seed = 0;
    std::size_t tr_maxrows = 0, tr_vocab = 0;
    auto* train = app.add_subcommand("train", "fine-tune a classifier on labelled tweets");
    train->add_option("--dataset", tr_dataset, "labelled tweet CSV");
    train->add_option("--encoder", tr_encoder, "bert_base_uncased, roberta_base or mini");
    train->add_option("--epochs", tr_epochs, "training epochs");
    train->add_option("--lr", tr_lr, "learning rate (0 picks the encoder default)");
    train->add_option("--seed", tr_seed, "split/init/shuffle seed");
    train->add_option("--batch-size", tr_batch, "examples per step");
    train->add_option("--max-seq-len", tr_maxseq, "content subwords per sequence");
    train->add_option("--max-rows", tr_maxrows, "stratified cap on the dataset, 0 keeps all");
    train->add_option("--split-ratio", tr_split, "train fraction of the split");
    train->add_option("--vocab-budget", tr_vocab, "wordpiece vocabulary budget (mini encoder)");
    train->add_option("--pretrained", tr_pretrained, "converted checkpoint directory");
    train->add_option("--kernels", tr_kernels, "auto, scalar or avx2");

    std::string ev_model, ev_test;
    auto* evaluate = app.add_subcommand("evaluate", "score a saved model against a labelled set");
    evaluate->add_option("--model", ev_model, "model directory (or its run directory)")->required();
    evaluate->add_option("--test", ev_test, "labelled tweet CSV")->required();

    std::string pr_model, pr_articles;
    int pr_stride = -1;
    double pr_threshold = -1;
    auto* predict = app.add_subcommand("predict", "label articles with a saved model");
    predict->add_option("--model", pr_model, "model directory (or its run directory)")->required();
    predict->add_option("--articles", pr_articles, "cleaned articles CSV")->required();
    predict->add_option("--stride", pr_stride, "chunk overlap in subwords");
    predict->add_option("--threshold", pr_threshold, "label decision threshold");

    std::string po_predictions, po_weights, po_articles;
    auto* polarity = app.add_subcommand("polarity", "polarity and distribution tables");
    polarity->add_option("--predictions", po_predictions, "predictions JSONL")->required();
    polarity->add_option("--weights", po_weights, "polarity weight JSON");
    polarity->add_option("--articles", po_articles, "cleaned articles CSV for the joins");

    std::string ts_predictions, ts_deaths, ts_region, ts_articles;
    auto* timeseries = app.add_subcommand("timeseries", "quarterly counts against a death series");
    timeseries->add_option("--predictions", ts_predictions, "predictions JSONL")->required();
    timeseries->add_option("--deaths", ts_deaths, "death series CSV")->required();
    timeseries->add_option("--region", ts_region, "region name in the death series")->required();
    timeseries->add_option("--articles", ts_articles, "cleaned articles CSV for the joins");

    std::string rp_run;
    bool rp_raster = false;
    auto* report = app.add_subcommand("report", "render figures from a run's tables");
    report->add_option("--run", rp_run, "run directory holding the tables")->required();
    report->add_flag("--raster", rp_raster, "emit PNGs next to the SVGs");

    std::string sa_predictions, sa_labels, sa_articles;
    std::size_t sa_k = 0;
    std::uint64_t sa_seed = 7;
    auto* sample = app.add_subcommand("sample", "seeded sample of labelled articles");
    sample->add_option("--predictions", sa_predictions, "predictions JSONL")->required();
    sample->add_option("--labels", sa_labels, "only articles predicted with these labels");
    sample->add_option("-k,--k", sa_k, "sample size")->required();
    sample->add_option("--seed", sa_seed, "sampling seed");
    sample->add_option("--articles", sa_articles, "cleaned articles CSV")->required();

    for (auto* sub : app.get_subcommands(nullptr)) {
        sub->add_option("--config", config_path, "JSON config document");
        if (sub != report)
            sub->add_option("--run", run_dir_flag, "explicit run directory");
        sub->add_option("--data-dir", data_dir, "lexicon and stop-word directory");
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        AppConfig cfg =
            config_path.empty() ? AppConfig{} : AppConfig::from_file(config_path);
        if (!data_dir.empty()) cfg.clean.data_dir = data_dir;

        CLI::App* sub = app.get_subcommands().at(0);
        fs::path explicit_dir = run_dir_flag.empty() ? fs::path{} : fs::path(run_dir_flag);
        RunManifest m;
        fs::path run_dir;

        if (sub == ingest) {
            if (!in_sections.empty()) cfg.ingest.sections = in_sections;
            if (ingest->count("--begin")) cfg.ingest.begin = in_begin;
            if (ingest->count("--end")) cfg.ingest.end = in_end;
            run_dir = make_run_dir("ingest", explicit_dir);
            m = run_ingest(cfg, in_articles, in_schema, run_dir);
        } else if (sub == clean) {
            run_dir = make_run_dir("clean", explicit_dir);
            m = run_clean(cfg, cl_in, cl_out, run_dir);
        } else if (sub == ngrams) {
            if (ngrams->count("--articles")) cfg.ngrams.articles = ng_articles;
            if (ng_no_extras) cfg.ngrams.extra_stopwords = false;
            run_dir = make_run_dir("ngrams", explicit_dir);
            m = run_ngrams(cfg, ng_section, ng_quarter, ng_n, ng_k, parse_labels_flag(ng_labels),
                           ng_predictions, run_dir);
        } else if (sub == train) {
            if (train->count("--dataset")) cfg.train.dataset = tr_dataset;
            if (train->count("--encoder"))
                cfg.train.train.family = parse_encoder_family(tr_encoder);
            if (train->count("--epochs")) cfg.train.train.epochs = tr_epochs;
            if (train->count("--lr")) cfg.train.train.learning_rate = tr_lr;
            if (train->count("--seed")) cfg.train.train.seed = tr_seed;
            if (train->count("--batch-size")) cfg.train.train.batch_size = tr_batch;
            if (train->count("--max-seq-len")) cfg.train.train.max_seq_len = tr_maxseq;
            if (train->count("--max-rows")) cfg.train.max_rows = tr_maxrows;
            if (train->count("--split-ratio")) cfg.train.split_ratio = tr_split;
            if (train->count("--vocab-budget")) cfg.train.vocab_budget = tr_vocab;
            if (train->count("--kernels")) cfg.train.train.kernels = tr_kernels;
            fs::path pretrained;
            if (cfg.train.train.family != EncoderFamily::mini)
                pretrained = resolve_pretrained_dir(cfg.train.train.family, tr_pretrained);
            run_dir = make_run_dir("train", explicit_dir);
            m = run_train(cfg, cfg.train.dataset, pretrained, run_dir);
        } else if (sub == evaluate) {
            run_dir = make_run_dir("evaluate", explicit_dir);
            m = run_evaluate(cfg, ev_model, ev_test, run_dir);
        } else if (sub == predict) {
            if (pr_stride >= 0) cfg.predict.stride = pr_stride;
            if (pr_threshold >= 0) cfg.predict.threshold = float(pr_threshold);
            run_dir = make_run_dir("predict", explicit_dir);
            m = run_predict(cfg, pr_model, pr_articles, run_dir);
        } else if (sub == polarity) {
            if (polarity->count("--articles")) cfg.analysis.articles = po_articles;
            run_dir = make_run_dir("polarity", explicit_dir);
            m = run_polarity(cfg, po_predictions, po_weights, run_dir);
        } else if (sub == timeseries) {
            if (timeseries->count("--articles")) cfg.analysis.articles = ts_articles;
            run_dir = make_run_dir("timeseries", explicit_dir);
            m = run_timeseries(cfg, ts_predictions, ts_deaths, ts_region, run_dir);
        } else if (sub == report) {
            if (rp_raster) cfg.report.raster = true;
            run_dir = rp_run;
            m = run_report(cfg, run_dir);
        } else if (sub == sample) {
            cfg.analysis.articles = sa_articles;
            run_dir = make_run_dir("sample", explicit_dir);
            m = run_sample(cfg, sa_predictions, parse_labels_flag(sa_labels), sa_k, sa_seed,
                           run_dir);
        }

        print_manifest(m, run_dir);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", error_class_name(e.cls()), e.what());
        return exit_code_of(e.cls());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}

} // namespace newsent
