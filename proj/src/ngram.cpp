#include "newsent/ngram.hpp"

#include "newsent/csv.hpp"
#include "newsent/util.hpp"

#include <algorithm>
#include <map>

namespace newsent {
namespace {

void check_n(int n) {
    if (n != 2 && n != 3) fail_config("ngram order must be 2 or 3, got " + std::to_string(n));
}

NGramTable build_table(const std::map<std::string, std::uint64_t>& counts, int n, std::size_t k) {
    std::vector<NGramEntry> entries;
    entries.reserve(counts.size());
    for (const auto& [joined, count] : counts) {
        NGramEntry e;
        e.gram = split(joined, ' ');
        e.count = count;
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(), [](const NGramEntry& a, const NGramEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.gram < b.gram;
    });
    if (entries.size() > k) entries.resize(k);
    NGramTable t;
    t.n = n;
    t.entries = std::move(entries);
    return t;
}

void count_doc(std::map<std::string, std::uint64_t>& counts, const std::vector<std::string>& doc,
               int n) {
    if (doc.size() < static_cast<std::size_t>(n)) return;
    for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        std::string joined = doc[i];
        for (int j = 1; j < n; ++j) {
            joined += ' ';
            joined += doc[i + j];
        }
        ++counts[joined];
    }
}

} // namespace

std::string NGramEntry::joined() const {
    std::string out;
    for (std::size_t i = 0; i < gram.size(); ++i) {
        if (i) out += ' ';
        out += gram[i];
    }
    return out;
}

std::string NGramTable::to_csv() const {
    CsvWriter w;
    w.write_row({"gram", "count"});
    for (const NGramEntry& e : entries) w.write_row({e.joined(), std::to_string(e.count)});
    return w.str();
}

std::vector<std::vector<std::string>> extract_ngrams(const std::vector<std::string>& tokens,
                                                     int n) {
    check_n(n);
    std::vector<std::vector<std::string>> out;
    if (tokens.size() < static_cast<std::size_t>(n)) return out;
    out.reserve(tokens.size() - n + 1);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
    return out;
}

NGramTable top_k(const std::vector<std::vector<std::string>>& docs, int n, std::size_t k) {
    check_n(n);
    if (k < 1) fail_config("ngram table size must be at least 1");
    std::map<std::string, std::uint64_t> counts;
    for (const auto& doc : docs) count_doc(counts, doc, n);
    return build_table(counts, n, k);
}

NGramTable sentiment_conditioned_ngrams(
    const std::unordered_map<std::string, LabelVector>& predictions,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& docs,
    const std::vector<Sentiment>& target_labels, int n, std::size_t k) {
    check_n(n);
    if (k < 1) fail_config("ngram table size must be at least 1");
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [id, tokens] : docs) {
        auto it = predictions.find(id);
        if (it == predictions.end())
            fail_data("no prediction for document '" + id + "' in sentiment-conditioned join");
        bool match = false;
        for (Sentiment s : target_labels) {
            if (it->second[static_cast<std::size_t>(s)]) {
                match = true;
                break;
            }
        }
        if (match) count_doc(counts, tokens, n);
    }
    return build_table(counts, n, k);
}

} // namespace newsent
