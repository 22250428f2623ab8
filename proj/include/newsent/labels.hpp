#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace newsent {

// Canonical label order. Every LabelVector/ScoreVector index in the codebase
// refers to this ordering; do not reorder.
enum class Sentiment : int {
    optimistic = 0,
    thankful = 1,
    empathetic = 2,
    pessimistic = 3,
    anxious = 4,
    sad = 5,
    annoyed = 6,
    denial = 7,
    official_report = 8,
    joking = 9,
};

inline constexpr std::size_t kNumLabels = 10;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "optimistic", "thankful",  "empathetic", "pessimistic",    "anxious",
    "sad",        "annoyed",   "denial",     "official_report", "joking",
};

using LabelVector = std::array<std::uint8_t, kNumLabels>;
using ScoreVector = std::array<float, kNumLabels>;

std::optional<Sentiment> parse_label(std::string_view name);

struct PolarityWeights {
    std::array<double, kNumLabels> w{};

    static PolarityWeights paper_defaults();

    double operator[](std::size_t i) const { return w[i]; }
};

// Signed intensity of a predicted label set: sum of weights over predicted
// labels normalized by the sum of their absolute weights. Empty set or an
// all-neutral set maps to 0.
double polarity_score(const LabelVector& predicted, const PolarityWeights& weights);

} // namespace newsent
