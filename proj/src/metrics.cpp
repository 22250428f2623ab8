#include "newsent/metrics.hpp"

#include "newsent/csv.hpp"
#include "newsent/model.hpp"
#include "newsent/util.hpp"

#include <json.hpp>

#include <cstddef>

namespace newsent {

namespace {

using json = nlohmann::json;

void check_rows(std::size_t n_true, std::size_t n_other, const char* op) {
    if (n_true == 0) fail_data(std::string(op) + ": empty input");
    if (n_true != n_other)
        fail_data(std::string(op) + ": row count mismatch (" + std::to_string(n_true) + " vs " +
                  std::to_string(n_other) + ")");
}

void check_binary(const std::vector<LabelVector>& y, const char* op) {
    for (const auto& row : y)
        for (auto v : row)
            if (v > 1) fail_data(std::string(op) + ": label cells must be 0 or 1");
}

} // namespace

double hamming_loss(const std::vector<LabelVector>& y_true,
                    const std::vector<LabelVector>& y_pred) {
    check_rows(y_true.size(), y_pred.size(), "hamming_loss");
    check_binary(y_true, "hamming_loss");
    check_binary(y_pred, "hamming_loss");
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        for (std::size_t j = 0; j < kNumLabels; ++j)
            if (y_true[i][j] != y_pred[i][j]) ++mismatched;
    return static_cast<double>(mismatched) / (static_cast<double>(y_true.size()) * kNumLabels);
}

double jaccard_samples(const std::vector<LabelVector>& y_true,
                       const std::vector<LabelVector>& y_pred) {
    check_rows(y_true.size(), y_pred.size(), "jaccard_samples");
    check_binary(y_true, "jaccard_samples");
    check_binary(y_pred, "jaccard_samples");
    double total = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        int inter = 0, uni = 0;
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            inter += y_true[i][j] & y_pred[i][j];
            uni += y_true[i][j] | y_pred[i][j];
        }
        total += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
    }
    return total / static_cast<double>(y_true.size());
}

double lrap(const std::vector<LabelVector>& y_true, const std::vector<ScoreVector>& scores) {
    check_rows(y_true.size(), scores.size(), "lrap");
    check_binary(y_true, "lrap");
    double total = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const auto& t = y_true[i];
        const auto& s = scores[i];
        int n_true = 0;
        for (std::size_t j = 0; j < kNumLabels; ++j) n_true += t[j];
        if (n_true == 0) {
            total += 1.0;
            continue;
        }
        double sample = 0.0;
        for (std::size_t l = 0; l < kNumLabels; ++l) {
            if (!t[l]) continue;
            // Counting >= on both sides puts every member of a tie group at
            // the group's bottom rank.
            int rank = 0, hits = 0;
            for (std::size_t j = 0; j < kNumLabels; ++j) {
                if (s[j] >= s[l]) {
                    ++rank;
                    if (t[j]) ++hits;
                }
            }
            sample += static_cast<double>(hits) / rank;
        }
        total += sample / n_true;
    }
    return total / static_cast<double>(y_true.size());
}

std::pair<double, double> f1_scores(const std::vector<LabelVector>& y_true,
                                    const std::vector<LabelVector>& y_pred) {
    check_rows(y_true.size(), y_pred.size(), "f1_scores");
    check_binary(y_true, "f1_scores");
    check_binary(y_pred, "f1_scores");
    double macro = 0.0;
    std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            if (y_true[i][j] && y_pred[i][j]) ++tp;
            else if (!y_true[i][j] && y_pred[i][j]) ++fp;
            else if (y_true[i][j] && !y_pred[i][j]) ++fn;
        }
        std::size_t denom = 2 * tp + fp + fn;
        macro += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
        tp_all += tp;
        fp_all += fp;
        fn_all += fn;
    }
    macro /= kNumLabels;
    std::size_t denom = 2 * tp_all + fp_all + fn_all;
    double micro = denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp_all) / static_cast<double>(denom);
    return {macro, micro};
}

MetricsReport report_from_scores(const std::vector<LabelVector>& y_true,
                                 const std::vector<ScoreVector>& scores, float threshold) {
    check_rows(y_true.size(), scores.size(), "report_from_scores");
    std::vector<LabelVector> y_pred;
    y_pred.reserve(scores.size());
    for (const auto& s : scores) y_pred.push_back(threshold_scores(s, threshold));

    MetricsReport r;
    r.hamming_loss = hamming_loss(y_true, y_pred);
    r.jaccard_score = jaccard_samples(y_true, y_pred);
    r.lrap = lrap(y_true, scores);
    auto [macro, micro] = f1_scores(y_true, y_pred);
    r.f1_macro = macro;
    r.f1_micro = micro;
    r.threshold = threshold;
    r.num_samples = y_true.size();
    return r;
}

MetricsReport evaluate(const Model& model, const std::vector<LabeledTweet>& test_set,
                       const EvalConfig& cfg) {
    if (test_set.empty()) fail_data("evaluate: empty test set");
    std::vector<std::string> texts;
    std::vector<LabelVector> y_true;
    texts.reserve(test_set.size());
    y_true.reserve(test_set.size());
    for (const auto& t : test_set) {
        texts.push_back(t.text);
        y_true.push_back(t.labels);
    }
    auto scores = model.predict_scores_batch(texts);
    MetricsReport r = report_from_scores(y_true, scores, cfg.threshold);
    r.model = encoder_family_name(model.train_config().family);
    r.dataset_fingerprint = dataset_fingerprint_of(test_set);
    return r;
}

ScoreVector label_prevalence(const std::vector<LabeledTweet>& train_set) {
    if (train_set.empty()) fail_data("label_prevalence: empty training set");
    ScoreVector p{};
    for (const auto& t : train_set)
        for (std::size_t j = 0; j < kNumLabels; ++j) p[j] += t.labels[j];
    for (auto& v : p) v /= static_cast<float>(train_set.size());
    return p;
}

MetricsReport constant_prevalence_report(const std::vector<LabeledTweet>& train_set,
                                         const std::vector<LabeledTweet>& test_set,
                                         float threshold) {
    if (test_set.empty()) fail_data("constant_prevalence_report: empty test set");
    ScoreVector p = label_prevalence(train_set);
    std::vector<LabelVector> y_true;
    y_true.reserve(test_set.size());
    for (const auto& t : test_set) y_true.push_back(t.labels);
    std::vector<ScoreVector> scores(test_set.size(), p);
    MetricsReport r = report_from_scores(y_true, scores, threshold);
    r.model = "constant_prevalence";
    r.dataset_fingerprint = dataset_fingerprint_of(test_set);
    return r;
}

std::string MetricsReport::to_json() const {
    json j{{"hamming_loss", hamming_loss},
           {"jaccard_score", jaccard_score},
           {"lrap", lrap},
           {"f1_macro", f1_macro},
           {"f1_micro", f1_micro},
           {"model", model},
           {"dataset_fingerprint", dataset_fingerprint},
           {"threshold", threshold},
           {"num_samples", num_samples}};
    return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail_data(std::string("metrics report: ") + e.what());
    }
    MetricsReport r;
    try {
        r.hamming_loss = j.at("hamming_loss").get<double>();
        r.jaccard_score = j.at("jaccard_score").get<double>();
        r.lrap = j.at("lrap").get<double>();
        r.f1_macro = j.at("f1_macro").get<double>();
        r.f1_micro = j.at("f1_micro").get<double>();
        r.model = j.at("model").get<std::string>();
        r.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
        r.threshold = j.at("threshold").get<float>();
        r.num_samples = j.at("num_samples").get<std::size_t>();
    } catch (const json::exception& e) {
        fail_data(std::string("metrics report: ") + e.what());
    }
    return r;
}

std::string metrics_comparison_csv(const std::vector<MetricsReport>& reports) {
    CsvWriter w;
    w.write_row({"model", "hamming_loss", "jaccard_score", "lrap", "f1_macro", "f1_micro"});
    for (const auto& r : reports)
        w.write_row({r.model, fmt_double(r.hamming_loss), fmt_double(r.jaccard_score),
                     fmt_double(r.lrap), fmt_double(r.f1_macro), fmt_double(r.f1_micro)});
    return w.str();
}

} // namespace newsent
