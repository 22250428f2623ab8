#include "newsent/model.hpp"

#include "newsent/util.hpp"

#include <cmath>

namespace newsent {

std::vector<std::string> chunk_document(const std::string& cleaned_text,
                                        const SubwordTokenizer& tok, int max_seq_len,
                                        int stride) {
    if (max_seq_len < 1) fail_config("max_seq_len must be positive");
    if (stride < 0 || stride >= max_seq_len)
        fail_config("stride must satisfy 0 <= stride < max_seq_len, got " +
                    std::to_string(stride));
    std::vector<int> ids = tok.encode(cleaned_text);
    const std::size_t window = static_cast<std::size_t>(max_seq_len);
    if (ids.size() <= window) return {cleaned_text};

    const std::size_t step = window - static_cast<std::size_t>(stride);
    std::vector<std::string> chunks;
    std::size_t start = 0;
    for (;;) {
        std::size_t end = std::min(start + window, ids.size());
        chunks.push_back(
            tok.decode(std::vector<int>(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                        ids.begin() + static_cast<std::ptrdiff_t>(end))));
        if (start + window >= ids.size()) break;
        start += step;
    }
    return chunks;
}

Prediction Model::predict_document(const std::string& article_id, const std::string& cleaned_body,
                                   int stride) const {
    Prediction p;
    p.article_id = article_id;
    if (cleaned_body.empty()) return p; // chunk_count 0 marks a skipped article

    std::vector<std::string> chunks = chunk_document(cleaned_body, tok_, tc_.max_seq_len, stride);
    std::vector<ScoreVector> scores = predict_scores_batch(chunks);
    p.chunk_count = static_cast<int>(chunks.size());

    if (chunks.size() == 1) {
        p.scores = scores[0];
    } else {
        double wsum = 0.0;
        std::array<double, kNumLabels> acc{};
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            double w = static_cast<double>(tok_.encode(chunks[i]).size());
            wsum += w;
            for (std::size_t j = 0; j < kNumLabels; ++j)
                acc[j] += w * static_cast<double>(scores[i][j]);
        }
        for (std::size_t j = 0; j < kNumLabels; ++j)
            p.scores[j] = static_cast<float>(acc[j] / wsum);
    }
    p.labels = threshold_scores(p.scores, tc_.threshold);
    return p;
}

} // namespace newsent
