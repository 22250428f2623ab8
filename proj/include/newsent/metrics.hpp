#pragma once

#include "newsent/labels.hpp"
#include "newsent/senwave.hpp"

#include <string>
#include <utility>
#include <vector>

namespace newsent {

class Model;

// Multi-label evaluation summary for one model on one dataset. The five
// scores all live in [0, 1]; the remaining fields identify what was scored.
struct MetricsReport {
    double hamming_loss = 0.0;
    double jaccard_score = 0.0;
    double lrap = 0.0;
    double f1_macro = 0.0;
    double f1_micro = 0.0;

    std::string model;
    std::string dataset_fingerprint;
    float threshold = 0.5f;
    std::size_t num_samples = 0;

    std::string to_json() const;
    static MetricsReport from_json(const std::string& text);
};

// All metric functions take row-aligned n x 10 matrices and reject empty or
// mismatched inputs.

// Fraction of label cells that disagree.
double hamming_loss(const std::vector<LabelVector>& y_true, const std::vector<LabelVector>& y_pred);

// Mean over samples of |true ∩ pred| / |true ∪ pred|; a sample where both
// sets are empty counts as 1.
double jaccard_samples(const std::vector<LabelVector>& y_true,
                       const std::vector<LabelVector>& y_pred);

// Label ranking average precision. Ranks descend by score; tied scores all
// take the bottom rank of their tie group. A sample with no true labels
// contributes 1.
double lrap(const std::vector<LabelVector>& y_true, const std::vector<ScoreVector>& scores);

// (macro, micro). Macro is the unweighted mean of per-label F1 with the 0/0
// case defined as 0; micro pools TP/FP/FN across labels first.
std::pair<double, double> f1_scores(const std::vector<LabelVector>& y_true,
                                    const std::vector<LabelVector>& y_pred);

// All five metrics from raw scores: predictions are scores >= threshold.
// Metadata fields other than threshold/num_samples are left for the caller.
MetricsReport report_from_scores(const std::vector<LabelVector>& y_true,
                                 const std::vector<ScoreVector>& scores, float threshold);

struct EvalConfig {
    float threshold = 0.5f;
};

// Scores every tweet with the model and fills the full report, including the
// model family and the test-set fingerprint.
MetricsReport evaluate(const Model& model, const std::vector<LabeledTweet>& test_set,
                       const EvalConfig& cfg);

// Per-label empirical frequency in a training set; the score a constant
// predictor assigns to every sample.
ScoreVector label_prevalence(const std::vector<LabeledTweet>& train_set);

// Report for the predictor that emits the training prevalences for every
// test sample. The floor any trained model has to beat.
MetricsReport constant_prevalence_report(const std::vector<LabeledTweet>& train_set,
                                         const std::vector<LabeledTweet>& test_set,
                                         float threshold);

// One row per report: model name followed by the five scores.
std::string metrics_comparison_csv(const std::vector<MetricsReport>& reports);

} // namespace newsent
