#pragma once

#include "newsent/analytics.hpp"
#include "newsent/corpus.hpp"
#include "newsent/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace newsent {

// Record of one CLI run: the command, the effective settings, fingerprints
// of every input and the files produced. Written as manifest.json in the run
// directory; rerunning a command against the same inputs reproduces every
// listed table byte for byte (images are cosmetic and exempt).
struct RunManifest {
    std::string command;
    std::string config; // effective config document
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs; // path -> content fingerprint
    std::vector<std::string> artifacts;        // relative to the run directory
    std::string created;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

// ---- configuration ---------------------------------------------------------
//
// One JSON document with a section per subcommand; missing keys fall back to
// the defaults below, unknown keys are config errors. CLI flags override the
// loaded values.

struct IngestConfig {
    std::vector<std::string> sections; // empty keeps every section
    std::string begin = "2018-01-01";
    std::string end = "2022-03-31";
};

struct CleanConfig {
    std::string data_dir = "data"; // lexicons and stop-word lists
};

struct NgramsConfig {
    std::string articles; // cleaned articles CSV
    bool extra_stopwords = true;
};

struct TrainCliConfig {
    std::string dataset;
    double split_ratio = 0.9;
    std::size_t max_rows = 0; // stratified cap, 0 keeps the full dataset
    std::size_t vocab_budget = 30000;
    TrainConfig train;
};

struct PredictCliConfig {
    int stride = 50;
    float threshold = 0.5f;
};

struct AnalysisConfig {
    std::string articles; // cleaned articles CSV used for joins
    PolarityWeights weights = PolarityWeights::paper_defaults();
    std::vector<Sentiment> negative_labels{kDefaultNegativeLabels.begin(),
                                           kDefaultNegativeLabels.end()};
};

struct ReportConfig {
    bool raster = false; // also emit PNGs next to the SVGs
};

struct AppConfig {
    IngestConfig ingest;
    CleanConfig clean;
    NgramsConfig ngrams;
    TrainCliConfig train;
    PredictCliConfig predict;
    AnalysisConfig analysis;
    ReportConfig report;

    std::string to_json() const; // full effective snapshot
    static AppConfig from_file(const std::filesystem::path& p);
    static AppConfig from_json_text(const std::string& text, const std::string& where);
};

// Polarity weight table as JSON: an object with all ten label names.
PolarityWeights weights_from_json(const std::string& text, const std::string& where);

// ---- prediction persistence ------------------------------------------------
//
// One JSON object per line: article_id, scores, labels, chunk_count.

std::string predictions_to_jsonl(const std::vector<Prediction>& preds);
std::vector<Prediction> predictions_from_jsonl(const std::string& text, const std::string& where);

// ---- qualitative sampling ---------------------------------------------------

struct SampleRow {
    std::string article_id;
    std::string date;
    std::string section;
    std::string labels; // comma-joined predicted label names
    std::string lead;   // leading 500 bytes of the body
};

struct SampleResult {
    std::vector<SampleRow> rows;
    std::string warning; // set when fewer than k articles matched
};

// Seeded sample of k articles whose predicted labels intersect the filter
// (an empty filter matches any labelled article). Fewer matches than k
// returns them all with a warning. A prediction without its article is
// fatal.
SampleResult sample_articles(const std::vector<Prediction>& predictions,
                             const std::vector<Article>& articles,
                             const std::vector<Sentiment>& label_filter, std::size_t k,
                             std::uint64_t seed);

std::string sample_csv(const SampleResult& result);

// ---- run directories --------------------------------------------------------

// First runs/<command>-NNN that this process manages to create; an explicit
// path is created (or reused) as given.
std::filesystem::path make_run_dir(const std::string& command,
                                   const std::filesystem::path& explicit_dir);

// ---- subcommand drivers ------------------------------------------------------
//
// Each loads its inputs, writes its artifacts plus manifest.json under the
// run directory and returns the manifest. Flags arrive pre-merged into cfg;
// path arguments stay explicit.

RunManifest run_ingest(const AppConfig& cfg, const std::filesystem::path& articles,
                       const std::filesystem::path& schema_json,
                       const std::filesystem::path& run_dir);

RunManifest run_clean(const AppConfig& cfg, const std::filesystem::path& in,
                      const std::filesystem::path& out, const std::filesystem::path& run_dir);

RunManifest run_ngrams(const AppConfig& cfg, const std::string& section,
                       const std::string& quarter, int n, std::size_t k,
                       const std::vector<Sentiment>& labels,
                       const std::filesystem::path& predictions,
                       const std::filesystem::path& run_dir);

RunManifest run_train(const AppConfig& cfg, const std::filesystem::path& dataset,
                      const std::filesystem::path& pretrained_dir,
                      const std::filesystem::path& run_dir);

RunManifest run_evaluate(const AppConfig& cfg, const std::filesystem::path& model_dir,
                         const std::filesystem::path& test, const std::filesystem::path& run_dir);

RunManifest run_predict(const AppConfig& cfg, const std::filesystem::path& model_dir,
                        const std::filesystem::path& articles,
                        const std::filesystem::path& run_dir);

RunManifest run_polarity(const AppConfig& cfg, const std::filesystem::path& predictions,
                         const std::filesystem::path& weights_json,
                         const std::filesystem::path& run_dir);

RunManifest run_timeseries(const AppConfig& cfg, const std::filesystem::path& predictions,
                           const std::filesystem::path& deaths, const std::string& region,
                           const std::filesystem::path& run_dir);

// Renders figures from the tables already sitting in run_dir; writes into
// run_dir/figures. Empty or missing tables are skipped with a warning on
// stderr, never an error.
RunManifest run_report(const AppConfig& cfg, const std::filesystem::path& run_dir);

RunManifest run_sample(const AppConfig& cfg, const std::filesystem::path& predictions,
                       const std::vector<Sentiment>& labels, std::size_t k, std::uint64_t seed,
                       const std::filesystem::path& run_dir);

// Accepts either a model directory or a run directory containing model/.
std::filesystem::path resolve_model_dir(const std::filesystem::path& given);

// Full command-line entry point: args exclude the program name. Usage
// problems exit 2, config errors 3, data errors 4, environment errors 5,
// anything else 1.
int cli(std::vector<std::string> args);

// Pretrained checkpoint directory for a published family: the explicit flag
// when given, else NEWSENT_HF_BERT_DIR / NEWSENT_HF_ROBERTA_DIR, else
// NEWSENT_MODEL_CACHE/<family>. Empty when nothing is configured.
std::filesystem::path resolve_pretrained_dir(EncoderFamily family,
                                             const std::filesystem::path& flag_value);

} // namespace newsent
