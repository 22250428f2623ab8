#include "newsent/pipeline.hpp"

#include "newsent/csv.hpp"
#include "newsent/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>

namespace newsent {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_doc(const std::string& where, const char* what) {
    fail_data(where + ": " + what);
}

} // namespace

std::string RunManifest::to_json() const {
    json j{{"command", command},
           {"config", json::parse(config.empty() ? "{}" : config)},
           {"seed", seed},
           {"inputs", inputs},
           {"artifacts", artifacts},
           {"created", created}};
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    RunManifest m;
    try {
        json j = json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.config = j.at("config").dump(2);
        m.seed = j.at("seed").get<std::uint64_t>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
        m.created = j.at("created").get<std::string>();
    } catch (const json::exception& e) {
        fail_data(std::string("run manifest: ") + e.what());
    }
    return m;
}

// ---- configuration ----------------------------------------------------------

namespace {

// Pulls known keys out of a section object, failing on strangers so a typo
// cannot silently fall back to a default.
class Section {
public:
    Section(const json& parent, const char* name, const std::string& where) : where_(where) {
        if (!parent.contains(name)) return;
        if (!parent.at(name).is_object())
            fail_config(where + ": section '" + name + "' must be an object");
        obj_ = parent.at(name);
        name_ = name;
    }

    template <typename T> void get(const char* key, T& into) {
        if (!obj_.contains(key)) return;
        try {
            into = obj_.at(key).get<T>();
        } catch (const json::exception&) {
            fail_config(where_ + ": bad value for " + name_ + "." + key);
        }
        seen_.push_back(key);
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                fail_config(where_ + ": unknown key " + name_ + "." + it.key());
    }

    const json& raw() const { return obj_; }
    bool has(const char* key) const { return obj_.contains(key); }
    void mark(const char* key) { seen_.push_back(key); }

private:
    json obj_ = json::object();
    std::string name_;
    std::string where_;
    std::vector<std::string> seen_;
};

std::vector<Sentiment> parse_label_list(const std::vector<std::string>& names,
                                        const std::string& where) {
    std::vector<Sentiment> out;
    for (const auto& n : names) {
        auto s = parse_label(n);
        if (!s) fail_config(where + ": unknown label '" + n + "'");
        out.push_back(*s);
    }
    return out;
}

} // namespace

PolarityWeights weights_from_json(const std::string& text, const std::string& where) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail_config(where + ": " + e.what());
    }
    if (!j.is_object()) fail_config(where + ": weight table must be an object");
    PolarityWeights w;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        std::string key(kLabelNames[i]);
        if (!j.contains(key)) fail_config(where + ": missing weight for " + key);
        if (!j.at(key).is_number()) fail_config(where + ": weight for " + key + " must be a number");
        w.w[i] = j.at(key).get<double>();
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!parse_label(it.key())) fail_config(where + ": unknown label '" + it.key() + "'");
    return w;
}

AppConfig AppConfig::from_json_text(const std::string& text, const std::string& where) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        fail_config(where + ": " + e.what());
    }
    if (!root.is_object()) fail_config(where + ": config must be a JSON object");
    static const std::vector<std::string> known{"ingest",  "clean",   "ngrams", "train",
                                               "predict", "analysis", "report"};
    for (auto it = root.begin(); it != root.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            fail_config(where + ": unknown section '" + it.key() + "'");

    AppConfig cfg;

    Section ingest(root, "ingest", where);
    ingest.get("sections", cfg.ingest.sections);
    ingest.get("begin", cfg.ingest.begin);
    ingest.get("end", cfg.ingest.end);
    ingest.finish();

    Section clean(root, "clean", where);
    clean.get("data_dir", cfg.clean.data_dir);
    clean.finish();

    Section ngrams(root, "ngrams", where);
    ngrams.get("articles", cfg.ngrams.articles);
    ngrams.get("extra_stopwords", cfg.ngrams.extra_stopwords);
    ngrams.finish();

    Section train(root, "train", where);
    train.get("dataset", cfg.train.dataset);
    train.get("split_ratio", cfg.train.split_ratio);
    train.get("max_rows", cfg.train.max_rows);
    train.get("vocab_budget", cfg.train.vocab_budget);
    std::string family = encoder_family_name(cfg.train.train.family);
    train.get("encoder", family);
    cfg.train.train.family = parse_encoder_family(family);
    train.get("max_seq_len", cfg.train.train.max_seq_len);
    train.get("batch_size", cfg.train.train.batch_size);
    train.get("epochs", cfg.train.train.epochs);
    train.get("learning_rate", cfg.train.train.learning_rate);
    train.get("weight_decay", cfg.train.train.weight_decay);
    train.get("dropout", cfg.train.train.dropout);
    train.get("threshold", cfg.train.train.threshold);
    train.get("seed", cfg.train.train.seed);
    train.get("kernels", cfg.train.train.kernels);
    train.finish();

    Section predict(root, "predict", where);
    predict.get("stride", cfg.predict.stride);
    predict.get("threshold", cfg.predict.threshold);
    predict.finish();

    Section analysis(root, "analysis", where);
    analysis.get("articles", cfg.analysis.articles);
    if (analysis.has("weights")) {
        analysis.mark("weights");
        cfg.analysis.weights = weights_from_json(analysis.raw().at("weights").dump(), where);
    }
    std::vector<std::string> negatives;
    analysis.get("negative_labels", negatives);
    if (!negatives.empty()) cfg.analysis.negative_labels = parse_label_list(negatives, where);
    analysis.finish();

    Section report(root, "report", where);
    report.get("raster", cfg.report.raster);
    report.finish();

    return cfg;
}

AppConfig AppConfig::from_file(const std::filesystem::path& p) {
    return from_json_text(read_file(p), p.string());
}

std::string AppConfig::to_json() const {
    json weights = json::object();
    for (std::size_t i = 0; i < kNumLabels; ++i)
        weights[std::string(kLabelNames[i])] = analysis.weights.w[i];
    std::vector<std::string> negatives;
    for (Sentiment s : analysis.negative_labels)
        negatives.emplace_back(kLabelNames[static_cast<std::size_t>(s)]);

    json j{
        {"ingest",
         {{"sections", ingest.sections}, {"begin", ingest.begin}, {"end", ingest.end}}},
        {"clean", {{"data_dir", clean.data_dir}}},
        {"ngrams", {{"articles", ngrams.articles}, {"extra_stopwords", ngrams.extra_stopwords}}},
        {"train",
         {{"dataset", train.dataset},
          {"split_ratio", train.split_ratio},
          {"max_rows", train.max_rows},
          {"vocab_budget", train.vocab_budget},
          {"encoder", encoder_family_name(train.train.family)},
          {"max_seq_len", train.train.max_seq_len},
          {"batch_size", train.train.batch_size},
          {"epochs", train.train.epochs},
          {"learning_rate", train.train.learning_rate},
          {"weight_decay", train.train.weight_decay},
          {"dropout", train.train.dropout},
          {"threshold", train.train.threshold},
          {"seed", train.train.seed},
          {"kernels", train.train.kernels}}},
        {"predict", {{"stride", predict.stride}, {"threshold", predict.threshold}}},
        {"analysis",
         {{"articles", analysis.articles},
          {"weights", weights},
          {"negative_labels", negatives}}},
        {"report", {{"raster", report.raster}}},
    };
    return j.dump(2) + "\n";
}

// ---- prediction persistence ---------------------------------------------------

std::string predictions_to_jsonl(const std::vector<Prediction>& preds) {
    std::string out;
    for (const auto& p : preds) {
        json j{{"article_id", p.article_id},
               {"scores", std::vector<float>(p.scores.begin(), p.scores.end())},
               {"labels", std::vector<int>(p.labels.begin(), p.labels.end())},
               {"chunk_count", p.chunk_count}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Prediction> predictions_from_jsonl(const std::string& text,
                                               const std::string& where) {
    std::vector<Prediction> out;
    std::size_t start = 0, line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        std::string ctx = where + " line " + std::to_string(line_no);
        try {
            json j = json::parse(line);
            Prediction p;
            p.article_id = j.at("article_id").get<std::string>();
            auto scores = j.at("scores").get<std::vector<float>>();
            auto labels = j.at("labels").get<std::vector<int>>();
            if (scores.size() != kNumLabels || labels.size() != kNumLabels)
                bad_doc(ctx, "scores and labels must have 10 entries");
            for (std::size_t i = 0; i < kNumLabels; ++i) {
                p.scores[i] = scores[i];
                if (labels[i] != 0 && labels[i] != 1) bad_doc(ctx, "labels must be 0 or 1");
                p.labels[i] = static_cast<std::uint8_t>(labels[i]);
            }
            p.chunk_count = j.at("chunk_count").get<int>();
            out.push_back(std::move(p));
        } catch (const json::exception& e) {
            fail_data(ctx + ": " + e.what());
        }
    }
    return out;
}

// ---- qualitative sampling ------------------------------------------------------

SampleResult sample_articles(const std::vector<Prediction>& predictions,
                             const std::vector<Article>& articles,
                             const std::vector<Sentiment>& label_filter, std::size_t k,
                             std::uint64_t seed) {
    if (k == 0) fail_config("sample_articles: k must be at least 1");
    std::unordered_map<std::string, const Article*> by_id;
    by_id.reserve(articles.size());
    for (const auto& a : articles) by_id.emplace(a.id, &a);

    LabelVector mask{};
    if (label_filter.empty()) {
        mask.fill(1);
    } else {
        for (Sentiment s : label_filter) mask[static_cast<std::size_t>(s)] = 1;
    }

    std::vector<std::size_t> matched;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        if (by_id.find(p.article_id) == by_id.end())
            fail_data("sample_articles: prediction for unknown article id '" + p.article_id + "'");
        bool hit = false;
        for (std::size_t j = 0; j < kNumLabels; ++j) hit = hit || (mask[j] && p.labels[j]);
        if (hit) matched.push_back(i);
    }

    Rng rng(seed);
    rng.shuffle(matched);

    SampleResult result;
    if (matched.size() < k)
        result.warning = "only " + std::to_string(matched.size()) + " articles matched, wanted " +
                         std::to_string(k);
    std::size_t take = std::min(k, matched.size());
    for (std::size_t t = 0; t < take; ++t) {
        const auto& p = predictions[matched[t]];
        const Article& a = *by_id.at(p.article_id);
        SampleRow row;
        row.article_id = a.id;
        row.date = a.publication_date.to_string();
        row.section = a.section;
        std::string names;
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            if (!p.labels[j]) continue;
            if (!names.empty()) names += ',';
            names += kLabelNames[j];
        }
        row.labels = std::move(names);
        row.lead = a.body.substr(0, 500);
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string sample_csv(const SampleResult& result) {
    CsvWriter w;
    w.write_row({"article_id", "date", "section", "labels", "lead"});
    for (const auto& r : result.rows) w.write_row({r.article_id, r.date, r.section, r.labels, r.lead});
    return w.str();
}

// ---- run directories -------------------------------------------------------------

std::filesystem::path make_run_dir(const std::string& command,
                                   const std::filesystem::path& explicit_dir) {
    namespace fs = std::filesystem;
    if (!explicit_dir.empty()) {
        fs::create_directories(explicit_dir);
        return explicit_dir;
    }
    fs::create_directories("runs");
    for (int i = 1; i < 10000; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "-%03d", i);
        fs::path candidate = fs::path("runs") / (command + buf);
        std::error_code ec;
        if (fs::create_directory(candidate, ec)) return candidate;
        if (ec && !fs::exists(candidate)) fail_env("cannot create " + candidate.string());
    }
    fail_env("no free run directory under runs/ for " + command);
}

std::filesystem::path resolve_model_dir(const std::filesystem::path& given) {
    namespace fs = std::filesystem;
    if (fs::exists(given / "model" / "manifest.json")) return given / "model";
    return given;
}

std::filesystem::path resolve_pretrained_dir(EncoderFamily family,
                                             const std::filesystem::path& flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = nullptr;
    if (family == EncoderFamily::bert_base_uncased) env = std::getenv("NEWSENT_HF_BERT_DIR");
    if (family == EncoderFamily::roberta_base) env = std::getenv("NEWSENT_HF_ROBERTA_DIR");
    if (env && *env) return env;
    if (const char* cache = std::getenv("NEWSENT_MODEL_CACHE"); cache && *cache)
        return std::filesystem::path(cache) / encoder_family_name(family);
    return {};
}

} // namespace newsent
