#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace newsent {

// Lexicons backing text normalization. All keys lowercase; emoji names are
// stored with underscores already replaced by spaces.
struct CleanLexicons {
    std::unordered_map<std::string, std::string> contractions;
    std::unordered_map<std::string, std::string> emoji;
    std::unordered_map<std::string, std::string> emoticons;
    std::size_t max_emoji_bytes = 0;

    static CleanLexicons load(const std::filesystem::path& data_dir);
};

// Normalization used for classifier input: lowercase, URLs stripped,
// contractions expanded, emoji replaced by word names, hashtag marks
// stripped (body kept), mentions dropped, punctuation removed, whitespace
// collapsed.
std::string clean_for_model(std::string_view raw, const CleanLexicons& lex);

// clean_for_model plus ascii emoticon translation and removal of a leading
// retweet marker.
std::string clean_tweet(std::string_view raw, const CleanLexicons& lex);

struct StopwordPolicy {
    std::unordered_set<std::string> base;
    std::map<std::string, std::unordered_set<std::string>> extra_categories;
    bool apply_extras = true;

    static StopwordPolicy load(const std::filesystem::path& base_file,
                               const std::filesystem::path& extra_file, bool apply_extras);
    static StopwordPolicy from_data_dir(const std::filesystem::path& data_dir, bool apply_extras);

    bool is_stopword(std::string_view token) const;
};

// Whitespace tokenization of cleaned text with stop-word and pure-numeral
// removal. Feed output of clean_for_model / clean_tweet only.
std::vector<std::string> tokenize_for_ngrams(std::string_view cleaned,
                                             const StopwordPolicy& policy);

} // namespace newsent
