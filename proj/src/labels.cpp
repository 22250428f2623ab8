#include "newsent/labels.hpp"

#include "newsent/util.hpp"

#include <cmath>

namespace newsent {

std::optional<Sentiment> parse_label(std::string_view name) {
    std::string key = to_lower_ascii(trim(name));
    for (char& c : key) {
        if (c == ' ' || c == '-') c = '_';
    }
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (key == kLabelNames[i]) return static_cast<Sentiment>(i);
    }
    return std::nullopt;
}

PolarityWeights PolarityWeights::paper_defaults() {
    PolarityWeights pw;
    pw.w = {3, 2, 0, -3, -2, -2, -1, -4, 0, 1};
    return pw;
}

double polarity_score(const LabelVector& predicted, const PolarityWeights& weights) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        if (predicted[i]) {
            num += weights[i];
            den += std::fabs(weights[i]);
        }
    }
    if (den == 0.0) return 0.0;
    return num / den;
}

} // namespace newsent
