#pragma once

#include "newsent/labels.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace newsent {

struct NGramEntry {
    std::vector<std::string> gram;
    std::uint64_t count = 0;

    std::string joined() const;
};

// Frequency table sorted by count descending, ties broken lexicographically
// by the space-joined gram.
struct NGramTable {
    int n = 0;
    std::vector<NGramEntry> entries;

    std::string to_csv() const; // columns: gram,count
};

// The max(0, len(tokens)-n+1) contiguous windows, in order. n must be 2 or 3.
std::vector<std::vector<std::string>> extract_ngrams(const std::vector<std::string>& tokens,
                                                     int n);

// Counts aggregated across docs; windows never cross document boundaries.
NGramTable top_k(const std::vector<std::vector<std::string>>& docs, int n, std::size_t k);

// top_k restricted to documents whose prediction has at least one label in
// target_labels. Every doc id must appear in predictions.
NGramTable sentiment_conditioned_ngrams(
    const std::unordered_map<std::string, LabelVector>& predictions,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
    const std::vector<Sentiment>& target_labels, int n, std::size_t k);

} // namespace newsent
