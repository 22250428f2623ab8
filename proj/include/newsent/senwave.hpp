#pragma once

#include "newsent/labels.hpp"
#include "newsent/textprep.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace newsent {

struct LabeledTweet {
    std::string text; // already cleaned
    LabelVector labels{};
};

// Column mapping for the labelled tweet file. Defaults match the published
// headers; canonical label order governs the vector layout regardless of
// file column order.
struct SenwaveSchema {
    std::string text = "Tweet";
    std::array<std::string, kNumLabels> label_columns = {
        "Optimistic", "Thankful", "Empathetic", "Pessimistic",    "Anxious",
        "Sad",        "Annoyed",  "Denial",     "Official report", "Joking",
    };
};

struct SenwaveLoadStats {
    std::size_t rows = 0;
    std::size_t loaded = 0;
    std::size_t dropped_empty = 0;
};

// Text passes through clean_tweet; rows empty after cleaning are dropped and
// counted. Non-binary label cells are fatal.
std::vector<LabeledTweet> load_senwave(const std::filesystem::path& path,
                                       const SenwaveSchema& schema, const CleanLexicons& lex,
                                       SenwaveLoadStats* stats = nullptr);

// Deterministic shuffle under seed, then prefix/suffix split; train size is
// round(ratio*N). Requires 0 < ratio < 1.
std::pair<std::vector<LabeledTweet>, std::vector<LabeledTweet>>
split_dataset(const std::vector<LabeledTweet>& dataset, double ratio, std::uint64_t seed);

// Proportional sample over exact label combinations (largest remainder),
// deterministic under seed. Returns all rows when target >= N.
std::vector<LabeledTweet> stratified_subset(const std::vector<LabeledTweet>& dataset,
                                            std::size_t target, std::uint64_t seed);

// Order-sensitive FNV-1a over text and label bits, 16 hex chars. Recorded in
// model manifests and metrics reports so artifacts name the exact data split.
std::string dataset_fingerprint_of(const std::vector<LabeledTweet>& rows);

} // namespace newsent
