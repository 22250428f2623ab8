#include "newsent/analytics.hpp"

#include "newsent/csv.hpp"
#include "newsent/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace newsent {

LabelCounts sentiment_distribution(const std::vector<Prediction>& predictions,
                                   bool exclude_official_report) {
    LabelCounts counts{};
    for (const auto& p : predictions)
        for (std::size_t j = 0; j < kNumLabels; ++j) counts[j] += p.labels[j];
    if (exclude_official_report)
        counts[static_cast<std::size_t>(Sentiment::official_report)] = 0;
    return counts;
}

std::vector<QuarterlySentiment> quarterly_aggregate(const std::vector<Prediction>& predictions,
                                                    const std::vector<Article>& articles,
                                                    const PolarityWeights& weights) {
    std::unordered_map<std::string, const Article*> by_id;
    by_id.reserve(articles.size());
    for (const auto& a : articles) by_id.emplace(a.id, &a);

    struct Acc {
        LabelCounts counts{};
        std::size_t n = 0;
        double polarity_sum = 0.0;
    };
    std::map<std::pair<std::string, Quarter>, Acc> groups;
    for (const auto& p : predictions) {
        auto it = by_id.find(p.article_id);
        if (it == by_id.end())
            fail_data("quarterly_aggregate: prediction for unknown article id '" + p.article_id +
                      "'");
        const Article& a = *it->second;
        Acc& g = groups[{a.section, Quarter::from_date(a.publication_date)}];
        for (std::size_t j = 0; j < kNumLabels; ++j) g.counts[j] += p.labels[j];
        ++g.n;
        g.polarity_sum += polarity_score(p.labels, weights);
    }

    std::vector<QuarterlySentiment> rows;
    rows.reserve(groups.size());
    for (const auto& [key, g] : groups) {
        QuarterlySentiment row;
        row.section = key.first;
        row.quarter = key.second;
        row.label_counts = g.counts;
        row.article_count = g.n;
        row.mean_polarity = g.polarity_sum / static_cast<double>(g.n);
        rows.push_back(std::move(row));
    }
    return rows;
}

CooccurrenceMatrix cooccurrence_matrix(const std::vector<Prediction>& predictions) {
    if (predictions.size() < 2)
        fail_data("cooccurrence_matrix: need at least 2 predictions, got " +
                  std::to_string(predictions.size()));
    const double n = static_cast<double>(predictions.size());

    // Joint presence counts are enough: phi for a 2x2 table is
    // (n11*n00 - n10*n01) / sqrt(row and column marginal products).
    std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> both{};
    LabelCounts ones{};
    for (const auto& p : predictions)
        for (std::size_t i = 0; i < kNumLabels; ++i) {
            if (!p.labels[i]) continue;
            ++ones[i];
            for (std::size_t j = 0; j < kNumLabels; ++j)
                if (p.labels[j]) ++both[i][j];
        }

    CooccurrenceMatrix out;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        out.m[i][i] = 1.0;
        for (std::size_t j = i + 1; j < kNumLabels; ++j) {
            double n11 = static_cast<double>(both[i][j]);
            double n10 = static_cast<double>(ones[i] - both[i][j]);
            double n01 = static_cast<double>(ones[j] - both[i][j]);
            double n00 = n - n11 - n10 - n01;
            double denom = (n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00);
            double phi = denom == 0.0 ? 0.0 : (n11 * n00 - n10 * n01) / std::sqrt(denom);
            out.m[i][j] = phi;
            out.m[j][i] = phi;
        }
    }
    return out;
}

DeathAlignment align_with_deaths(const std::vector<QuarterlySentiment>& quarterly,
                                 const DeathSeries& deaths,
                                 const std::vector<Sentiment>& negative_labels) {
    struct Agg {
        std::size_t articles = 0;
        std::uint64_t negatives = 0;
    };
    std::map<Quarter, Agg> by_quarter;
    for (const auto& row : quarterly) {
        Agg& a = by_quarter[row.quarter];
        a.articles += row.article_count;
        for (Sentiment s : negative_labels)
            a.negatives += row.label_counts[static_cast<std::size_t>(s)];
    }

    DeathAlignment out;
    out.region = deaths.region;
    for (const auto& [q, d] : deaths.points) {
        auto it = by_quarter.find(q);
        if (it == by_quarter.end()) continue;
        out.rows.push_back({q, it->second.articles, it->second.negatives, d});
    }
    if (out.rows.empty()) {
        out.warning = "no quarters in common between the sentiment table and the death series";
        return out;
    }

    const double n = static_cast<double>(out.rows.size());
    double mx = 0.0, my = 0.0;
    for (const auto& r : out.rows) {
        mx += static_cast<double>(r.deaths);
        my += static_cast<double>(r.negative_label_count);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto& r : out.rows) {
        double dx = static_cast<double>(r.deaths) - mx;
        double dy = static_cast<double>(r.negative_label_count) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx > 0.0 && syy > 0.0) out.correlation = sxy / std::sqrt(sxx * syy);
    return out;
}

std::string quarterly_csv(const std::vector<QuarterlySentiment>& rows) {
    CsvWriter w;
    std::vector<std::string> header{"quarter", "section"};
    for (auto name : kLabelNames) header.emplace_back(name);
    header.emplace_back("article_count");
    header.emplace_back("mean_polarity");
    w.write_row(header);
    for (const auto& r : rows) {
        std::vector<std::string> fields{r.quarter.to_string(), r.section};
        for (std::size_t j = 0; j < kNumLabels; ++j)
            fields.push_back(std::to_string(r.label_counts[j]));
        fields.push_back(std::to_string(r.article_count));
        fields.push_back(fmt_double(r.mean_polarity));
        w.write_row(fields);
    }
    return w.str();
}

std::string cooccurrence_csv(const CooccurrenceMatrix& m) {
    CsvWriter w;
    std::vector<std::string> header{"label"};
    for (auto name : kLabelNames) header.emplace_back(name);
    w.write_row(header);
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        std::vector<std::string> fields{std::string(kLabelNames[i])};
        for (std::size_t j = 0; j < kNumLabels; ++j) fields.push_back(fmt_double(m.m[i][j]));
        w.write_row(fields);
    }
    return w.str();
}

} // namespace newsent
