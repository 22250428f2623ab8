#include "newsent/corpus.hpp"

#include "newsent/csv.hpp"
#include "newsent/util.hpp"

#include <algorithm>
#include <unordered_set>

namespace newsent {

std::vector<Article> load_articles(const std::filesystem::path& path, const ArticleSchema& schema,
                                   ArticleLoadStats* stats) {
    CsvTable t = CsvTable::from_file(path);
    std::size_t c_date = t.require_column(schema.date);
    std::size_t c_section = t.require_column(schema.section);
    std::size_t c_title = t.require_column(schema.title);
    std::size_t c_body = t.require_column(schema.body);
    bool has_id = !schema.id.empty();
    std::size_t c_id = has_id ? t.require_column(schema.id) : 0;

    ArticleLoadStats local;
    std::vector<Article> out;
    out.reserve(t.num_rows());
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        ++local.rows;
        auto date = CalDate::parse(t.cell(r, c_date));
        if (!date) {
            ++local.skipped_bad_date;
            continue;
        }
        std::string body = t.cell(r, c_body);
        if (trim(body).empty()) {
            ++local.skipped_empty_body;
            continue;
        }
        Article a;
        a.id = has_id ? t.cell(r, c_id) : "row" + std::to_string(r + 1);
        a.publication_date = *date;
        a.section = canonical_section(t.cell(r, c_section));
        a.title = t.cell(r, c_title);
        a.body = std::move(body);
        out.push_back(std::move(a));
        ++local.loaded;
    }
    if (stats) *stats = local;
    return out;
}

std::vector<Article> filter_articles(const std::vector<Article>& articles,
                                     const std::vector<std::string>& sections,
                                     const DateWindow& window) {
    if (sections.empty()) fail_config("section filter requires at least one section");
    std::unordered_set<std::string> wanted;
    for (const std::string& s : sections) wanted.insert(canonical_section(s));
    std::vector<Article> out;
    for (const Article& a : articles) {
        if (wanted.count(a.section) && window.contains(a.publication_date)) out.push_back(a);
    }
    return out;
}

DeathSeries load_death_series(const std::filesystem::path& path, const std::string& region) {
    CsvTable t = CsvTable::from_file(path);
    std::size_t c_quarter = t.require_column("quarter");
    std::size_t c_deaths = t.require_column("deaths");
    auto c_region = t.find_column("region");

    std::string want = to_lower_ascii(trim(region));
    DeathSeries series;
    series.region = region;
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        if (c_region && to_lower_ascii(trim(t.cell(r, *c_region))) != want) continue;
        auto q = Quarter::parse(t.cell(r, c_quarter));
        if (!q)
            fail_data(path.string() + ": bad quarter '" + t.cell(r, c_quarter) + "' at row " +
                      std::to_string(r + 2));
        auto deaths = parse_int(t.cell(r, c_deaths));
        if (!deaths)
            fail_data(path.string() + ": bad death count '" + t.cell(r, c_deaths) + "' at row " +
                      std::to_string(r + 2));
        if (*deaths < 0)
            fail_data(path.string() + ": negative death count at " + q->to_string());
        series.points.emplace_back(*q, static_cast<std::uint64_t>(*deaths));
    }
    std::sort(series.points.begin(), series.points.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < series.points.size(); ++i) {
        if (series.points[i].first == series.points[i - 1].first)
            fail_data(path.string() + ": duplicate quarter " +
                      series.points[i].first.to_string() + " for region " + region);
    }
    return series;
}

} // namespace newsent
