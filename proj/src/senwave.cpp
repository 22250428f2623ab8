#include "newsent/senwave.hpp"

#include "newsent/csv.hpp"
#include "newsent/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace newsent {

std::string dataset_fingerprint_of(const std::vector<LabeledTweet>& rows) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& r : rows) {
        mix(r.text);
        char lab[kNumLabels + 1];
        for (std::size_t j = 0; j < kNumLabels; ++j) lab[j] = static_cast<char>('0' + r.labels[j]);
        lab[kNumLabels] = '\n';
        mix(std::string_view(lab, kNumLabels + 1));
    }
    char buf[17] = {};
    std::uint64_t v = h;
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[v & 0xF];
        v >>= 4;
    }
    return std::string(buf, 16);
}

std::vector<LabeledTweet> load_senwave(const std::filesystem::path& path,
                                       const SenwaveSchema& schema, const CleanLexicons& lex,
                                       SenwaveLoadStats* stats) {
    CsvTable t = CsvTable::from_file(path);
    std::size_t c_text = t.require_column(schema.text);
    std::array<std::size_t, kNumLabels> c_label{};
    for (std::size_t i = 0; i < kNumLabels; ++i)
        c_label[i] = t.require_column(schema.label_columns[i]);

    SenwaveLoadStats local;
    std::vector<LabeledTweet> out;
    out.reserve(t.num_rows());
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        ++local.rows;
        LabeledTweet tw;
        for (std::size_t i = 0; i < kNumLabels; ++i) {
            std::string cell(trim(t.cell(r, c_label[i])));
            if (cell == "0") tw.labels[i] = 0;
            else if (cell == "1") tw.labels[i] = 1;
            else
                fail_data(path.string() + ": label cell '" + cell + "' in column '" +
                          schema.label_columns[i] + "' row " + std::to_string(r + 2) +
                          " is not 0/1");
        }
        tw.text = clean_tweet(t.cell(r, c_text), lex);
        if (tw.text.empty()) {
            ++local.dropped_empty;
            continue;
        }
        out.push_back(std::move(tw));
        ++local.loaded;
    }
    if (stats) *stats = local;
    return out;
}

std::pair<std::vector<LabeledTweet>, std::vector<LabeledTweet>>
split_dataset(const std::vector<LabeledTweet>& dataset, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        fail_config("split ratio must be strictly between 0 and 1");
    std::vector<std::size_t> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(idx);
    std::size_t train_n =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(dataset.size())));
    train_n = std::min(train_n, dataset.size());
    std::pair<std::vector<LabeledTweet>, std::vector<LabeledTweet>> out;
    out.first.reserve(train_n);
    out.second.reserve(dataset.size() - train_n);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i < train_n) out.first.push_back(dataset[idx[i]]);
        else out.second.push_back(dataset[idx[i]]);
    }
    return out;
}

std::vector<LabeledTweet> stratified_subset(const std::vector<LabeledTweet>& dataset,
                                            std::size_t target, std::uint64_t seed) {
    if (target >= dataset.size()) return dataset;

    std::map<unsigned, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        unsigned mask = 0;
        for (std::size_t b = 0; b < kNumLabels; ++b)
            if (dataset[i].labels[b]) mask |= 1u << b;
        groups[mask].push_back(i);
    }

    struct Alloc {
        unsigned mask;
        std::size_t base;
        double remainder;
        std::size_t size;
    };
    std::vector<Alloc> allocs;
    std::size_t assigned = 0;
    for (const auto& [mask, members] : groups) {
        double exact = static_cast<double>(target) * members.size() / dataset.size();
        std::size_t base = static_cast<std::size_t>(exact);
        base = std::min(base, members.size());
        allocs.push_back({mask, base, exact - static_cast<double>(base), members.size()});
        assigned += base;
    }
    std::stable_sort(allocs.begin(), allocs.end(), [](const Alloc& a, const Alloc& b) {
        if (a.remainder != b.remainder) return a.remainder > b.remainder;
        if (a.size != b.size) return a.size > b.size;
        return a.mask < b.mask;
    });
    while (assigned < target) {
        bool progressed = false;
        for (auto& a : allocs) {
            if (assigned >= target) break;
            if (a.base < a.size) {
                ++a.base;
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed) break;
    }

    Rng rng(seed);
    std::vector<std::size_t> chosen;
    chosen.reserve(target);
    std::map<unsigned, std::size_t> take;
    for (const auto& a : allocs) take[a.mask] = a.base;
    for (const auto& [mask, members] : groups) {
        std::vector<std::size_t> pool = members;
        rng.shuffle(pool);
        for (std::size_t i = 0; i < take[mask] && i < pool.size(); ++i)
            chosen.push_back(pool[i]);
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<LabeledTweet> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(dataset[i]);
    return out;
}

} // namespace newsent
