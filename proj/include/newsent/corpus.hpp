#pragma once

#include "newsent/dates.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace newsent {

struct Article {
    std::string id;
    CalDate publication_date;
    std::string section; // canonical form: trimmed, ascii-lowercased
    std::string title;
    std::string body;
};

// Column-name mapping for the article dump. The id column is optional; when
// empty, ids are synthesized from the row number.
struct ArticleSchema {
    std::string id = "article_id";
    std::string date = "date";
    std::string section = "section";
    std::string title = "title";
    std::string body = "body";
};

struct ArticleLoadStats {
    std::size_t rows = 0;
    std::size_t loaded = 0;
    std::size_t skipped_bad_date = 0;
    std::size_t skipped_empty_body = 0;
};

// Rows with unparseable dates or empty bodies are skipped and counted, not
// fatal. Missing file or missing schema columns are fatal.
std::vector<Article> load_articles(const std::filesystem::path& path, const ArticleSchema& schema,
                                   ArticleLoadStats* stats = nullptr);

// Exact section match after trim/case-fold; window bounds inclusive; input
// order preserved.
std::vector<Article> filter_articles(const std::vector<Article>& articles,
                                     const std::vector<std::string>& sections,
                                     const DateWindow& window);

inline Quarter assign_quarter(const CalDate& d) { return Quarter::from_date(d); }

struct DeathSeries {
    std::string region;
    std::vector<std::pair<Quarter, std::uint64_t>> points; // strictly increasing
};

// Accepts columns quarter ("YYYY-Qn") and deaths; an optional region column
// restricts rows to the requested region. Duplicate quarters and negative
// counts are fatal.
DeathSeries load_death_series(const std::filesystem::path& path, const std::string& region);

} // namespace newsent
