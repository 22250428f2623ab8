#pragma once

#include "newsent/corpus.hpp"
#include "newsent/labels.hpp"
#include "newsent/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace newsent {

using LabelCounts = std::array<std::uint64_t, kNumLabels>;

// One (section, quarter) cell of the sentiment time series. Labels are
// multi-assign, so label counts can exceed article_count in total.
struct QuarterlySentiment {
    Quarter quarter;
    std::string section;
    LabelCounts label_counts{};
    std::size_t article_count = 0;
    double mean_polarity = 0.0; // unweighted mean of per-article scores
};

// Symmetric 10x10 phi coefficients in canonical label order. Diagonal is 1;
// rows and columns of labels that never vary are zero off-diagonal.
struct CooccurrenceMatrix {
    std::array<std::array<double, kNumLabels>, kNumLabels> m{};

    double at(std::size_t i, std::size_t j) const { return m[i][j]; }
};

// How many predictions carry each label. The exclusion flag zeroes only the
// official_report column; no prediction is dropped, so the other nine counts
// never move.
LabelCounts sentiment_distribution(const std::vector<Prediction>& predictions,
                                   bool exclude_official_report);

// Joins predictions to their articles (a prediction without a matching
// article id is fatal) and groups by (section, publication quarter). Groups
// with no articles simply do not appear. Rows sort by section then quarter.
std::vector<QuarterlySentiment> quarterly_aggregate(const std::vector<Prediction>& predictions,
                                                    const std::vector<Article>& articles,
                                                    const PolarityWeights& weights);

// Pearson correlation of the binary indicator columns; needs at least two
// predictions.
CooccurrenceMatrix cooccurrence_matrix(const std::vector<Prediction>& predictions);

inline constexpr std::array<Sentiment, 5> kDefaultNegativeLabels = {
    Sentiment::pessimistic, Sentiment::anxious, Sentiment::sad,
    Sentiment::annoyed,     Sentiment::denial,
};

struct DeathAlignmentRow {
    Quarter quarter;
    std::size_t article_count = 0;
    std::uint64_t negative_label_count = 0;
    std::uint64_t deaths = 0;
};

struct DeathAlignment {
    std::string region;
    std::vector<DeathAlignmentRow> rows; // ascending by quarter
    // Pearson of deaths vs negative_label_count; absent when either series
    // is constant or fewer than two quarters join.
    std::optional<double> correlation;
    std::string warning; // set when the join is empty
};

// Inner join of the (section-collapsed) quarterly table with a death series.
DeathAlignment align_with_deaths(const std::vector<QuarterlySentiment>& quarterly,
                                 const DeathSeries& deaths,
                                 const std::vector<Sentiment>& negative_labels =
                                     {kDefaultNegativeLabels.begin(), kDefaultNegativeLabels.end()});

// Columns: quarter, section, the ten label counts, article_count, mean_polarity.
std::string quarterly_csv(const std::vector<QuarterlySentiment>& rows);

// 10x10 grid with a label header row and column.
std::string cooccurrence_csv(const CooccurrenceMatrix& m);

} // namespace newsent
