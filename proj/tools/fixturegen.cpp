#include "fixturegen.hpp"

#include "newsent/csv.hpp"
#include "newsent/labels.hpp"
#include "newsent/util.hpp"

#include <array>
#include <cstdio>
#include <string>
#include <vector>

namespace newsent {
namespace {

const char* kFillerWords[] = {
    "covid",   "lockdown", "pandemic", "today",    "people",  "home",
    "staying", "safe",     "second",   "wave",     "numbers", "everyone",
    "still",   "really",   "morning",  "outside",  "street",  "waiting",
    "weeks",   "months",   "family",   "friends",  "city",    "country",
};

struct LabelPool {
    double weight;
    std::array<const char*, 6> phrases;
};

// Phrase pools give each label a distinct vocabulary so a small model can
// actually learn the mapping from the synthetic corpus.
const LabelPool kPools[kNumLabels] = {
    {0.25, {"hope this ends soon", "better days are coming", "we will beat this",
            "vaccine progress looks promising", "recovery is ahead", "optimistic about reopening"}},
    {0.12, {"thank you nurses", "so grateful for the careworkers", "thanks to the doctors",
            "appreciate the delivery drivers", "thankful for our community", "bless the volunteers"}},
    {0.08, {"thoughts are with the families", "my heart goes out to them", "feel for those suffering",
            "sending love to the victims", "we stand with the bereaved", "compassion for the isolated"}},
    {0.12, {"no end in sight", "things will only get worse", "the economy is finished",
            "we are doomed", "nothing will ever recover", "pointless to even try"}},
    {0.14, {"worried about the spike", "scared of the second wave", "anxiety keeps rising",
            "fear the numbers tonight", "nervous about going out", "panicking over supplies"}},
    {0.14, {"heartbroken by the losses", "mourning my uncle", "crying all day",
            "so sad about the deaths", "grief is everywhere", "devastated by the toll"}},
    {0.15, {"fed up with lockdown", "sick of these rules", "annoyed by the queues",
            "tired of this mess", "frustrated with the ban", "had enough of restrictions"}},
    {0.04, {"the virus is a hoax", "this is overblown nonsense", "it is not real",
            "fake numbers again", "refuse to believe the figures", "plandemic propaganda"}},
    {0.16, {"cases reported today", "daily briefing confirms new totals", "official figures show a rise",
            "ministry update on infections", "statistics released this evening", "bulletin lists the fatalities"}},
    {0.14, {"lol quarantine haircut", "haha my sourdough failed", "joke of a year",
            "meme material honestly", "laughing so i do not cry", "comedy gold from the podium"}},
};

std::string pick(Rng& rng, const char* const* pool, size_t n) {
    return pool[rng.uniform(n)];
}

void capitalize_first(std::string& s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = char(s[0] - 'a' + 'A');
}

void write_fixture_tweets_impl(const std::filesystem::path& dir) {
    Rng rng(20200314);
    CsvWriter w;
    std::vector<std::string> header = {"Tweet"};
    for (std::string_view name : kLabelNames) {
        std::string col(name);
        for (char& c : col)
            if (c == '_') c = ' ';
        capitalize_first(col);
        header.push_back(col);
    }
    w.write_row(header);

    const size_t kRows = 4200;
    for (size_t i = 0; i < kRows; ++i) {
        double u = rng.uniform01();
        size_t k = u < 0.05 ? 0 : u < 0.60 ? 1 : u < 0.90 ? 2 : 3;
        LabelVector labels{};
        size_t chosen = 0;
        while (chosen < k) {
            double v = rng.uniform01();
            double acc = 0.0;
            size_t pickidx = kNumLabels - 1;
            double total = 0.0;
            for (const auto& p : kPools) total += p.weight;
            for (size_t j = 0; j < kNumLabels; ++j) {
                acc += kPools[j].weight / total;
                if (v < acc) {
                    pickidx = j;
                    break;
                }
            }
            if (!labels[pickidx]) {
                labels[pickidx] = 1;
                ++chosen;
            }
        }

        std::vector<std::string> fragments;
        for (size_t j = 0; j < kNumLabels; ++j) {
            if (!labels[j]) continue;
            size_t a = rng.uniform(kPools[j].phrases.size());
            size_t b = (a + 1 + rng.uniform(kPools[j].phrases.size() - 1)) % kPools[j].phrases.size();
            fragments.push_back(kPools[j].phrases[a]);
            fragments.push_back(kPools[j].phrases[b]);
        }
        size_t nfill = 1 + rng.uniform(3);
        for (size_t f = 0; f < nfill; ++f)
            fragments.push_back(pick(rng, kFillerWords, std::size(kFillerWords)));
        rng.shuffle(fragments);

        std::string text;
        if (rng.uniform01() < 0.10) text += "RT @someone: ";
        if (rng.uniform01() < 0.12) text += "@GuardianNews ";
        for (size_t f = 0; f < fragments.size(); ++f) {
            std::string frag = fragments[f];
            if (rng.uniform01() < 0.25) capitalize_first(frag);
            if (f) text += rng.uniform01() < 0.15 ? ", " : " ";
            text += frag;
        }
        double noise = rng.uniform01();
        if (noise < 0.10) text += " #COVID19";
        else if (noise < 0.18) text += " :)";
        else if (noise < 0.24) text += " https://t.co/" + std::to_string(1000 + rng.uniform(9000));
        else if (noise < 0.28) text += " can't even";

        std::vector<std::string> row = {text};
        for (size_t j = 0; j < kNumLabels; ++j) row.push_back(labels[j] ? "1" : "0");
        w.write_row(row);
    }
    write_file(dir / "tweets_train.csv", w.str());
}

const char* kCovidCoreMandatory[] = {
    "Public health teams widened testing across the capital.",
    "Every confirmed case was traced back to the original cluster.",
    "The coronavirus outbreak spread to a dozen more countries overnight.",
    "Public Health England issued fresh guidance for hospitals.",
    "The chief medical officer urged calm at the evening briefing.",
};

const char* kCovidCoreOptional[] = {
    "A confirmed case emerged near the quarantine centre.",
    "Public Health England updated its advice for travellers.",
    "Officials said the public health response would be expanded.",
    "Modelling suggested the coronavirus outbreak had not yet peaked.",
    "Markets fell sharply as investors weighed the risk.",
    "Schools and offices closed across the region.",
    "Flights were suspended for a fortnight.",
    "Supermarkets limited purchases of essential goods.",
    "Laboratories raced to expand testing capacity.",
    "Hospitals postponed elective surgery to free up beds.",
    "Cruise passengers remained in isolation offshore.",
};

const char* kCovidGeneral[] = {
    "Vaccination centres opened in stadiums and cathedrals.",
    "The furlough scheme was extended for another quarter.",
    "Ministers defended the tiered restrictions in parliament.",
    "A new variant prompted tighter border checks.",
    "Public health advice shifted as evidence accumulated.",
    "Hospital admissions climbed for the third week.",
    "Contact tracing apps struggled with uptake.",
    "Economists revised growth forecasts downwards.",
    "Care homes restricted visits ahead of winter.",
    "The booster campaign reached younger cohorts.",
    "Testing queues stretched around the block.",
    "Travel corridors were reviewed every fortnight.",
};

const char* kAusNegative[] = {
    "The hotel quarantine program faced a scathing review.",
    "Returned travellers described chaos inside the hotel quarantine program.",
    "The health human service department defended its contact tracers.",
    "Melbourne residents said they were fed up with the curfew.",
    "Families were heartbroken after outbreaks in aged care.",
    "Critics called the border closure an overblown response.",
    "The premier faced annoyed questions about security contracts.",
    "A leaked health human service memo showed staffing gaps.",
    "Grief and frustration mixed at the daily press conference.",
    "Businesses said the snap lockdown left them devastated.",
};

const char* kGeneric[] = {
    "The committee published its long awaited findings.",
    "Negotiators edged towards a compromise on tariffs.",
    "The gallery unveiled a retrospective of coastal photography.",
    "Voters punished the incumbents in regional ballots.",
    "The budget promised modest relief for commuters.",
    "Engineers completed the bridge ahead of schedule.",
    "A drought tested farmers across the eastern states.",
    "The orchestra toured with a new commission.",
    "Housing affordability dominated the leaders debate.",
    "Scientists mapped the reef with autonomous gliders.",
    "The inquiry heard evidence from former executives.",
    "Libraries extended hours to meet demand.",
};

const char* kSport[] = {
    "The visitors equalised deep into stoppage time.",
    "A late penalty settled a scrappy derby.",
    "The champions rested their entire front line.",
    "Relegation rivals shared the points in the rain.",
    "The keeper saved twice from the spot.",
    "A hat trick inside twenty minutes stunned the hosts.",
    "The transfer window closed without a marquee signing.",
    "Injuries forced a reshuffle at the back.",
    "The manager praised the travelling supporters.",
    "Extra time loomed until a deflected winner.",
};

enum class BodyStyle { CovidCore, CovidGeneral, AusNegative, Generic, Sport };

std::string make_body(Rng& rng, BodyStyle style) {
    std::vector<std::string> sentences;
    auto add_from = [&](const char* const* pool, size_t n, size_t count) {
        for (size_t i = 0; i < count; ++i) sentences.push_back(pick(rng, pool, n));
    };
    switch (style) {
    case BodyStyle::CovidCore:
        for (const char* s : kCovidCoreMandatory) sentences.push_back(s);
        add_from(kCovidCoreOptional, std::size(kCovidCoreOptional), 3 + rng.uniform(3));
        break;
    case BodyStyle::CovidGeneral:
        add_from(kCovidGeneral, std::size(kCovidGeneral), 5 + rng.uniform(3));
        if (rng.uniform01() < 0.3) add_from(kCovidCoreOptional, std::size(kCovidCoreOptional), 1);
        break;
    case BodyStyle::AusNegative:
        add_from(kAusNegative, std::size(kAusNegative), 5 + rng.uniform(3));
        break;
    case BodyStyle::Generic:
        add_from(kGeneric, std::size(kGeneric), 5 + rng.uniform(3));
        break;
    case BodyStyle::Sport:
        add_from(kSport, std::size(kSport), 4 + rng.uniform(3));
        break;
    }
    rng.shuffle(sentences);
    std::string body;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (i) body += ' ';
        body += sentences[i];
    }
    return body;
}

std::string date_in_quarter(Rng& rng, int year, int q) {
    int month = 3 * (q - 1) + 1 + int(rng.uniform(3));
    int day = 1 + int(rng.uniform(28));
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

struct ArticleRow {
    std::string date, section, title, body;
};

void write_fixture_articles_impl(const std::filesystem::path& dir) {
    Rng rng(19700101);
    std::vector<ArticleRow> rows;

    struct Block {
        const char* section;
        BodyStyle style;
        const char* title_stem;
        std::vector<std::pair<int, int>> quarters;
        size_t count;
    };
    std::vector<std::pair<int, int>> pre = {{2018, 1}, {2018, 2}, {2018, 3}, {2018, 4},
                                            {2019, 1}, {2019, 2}, {2019, 3}, {2019, 4}};
    std::vector<std::pair<int, int>> pandemicTail = {{2020, 2}, {2020, 3}, {2020, 4}, {2021, 1},
                                                     {2021, 2}, {2021, 3}, {2021, 4}, {2022, 1}};
    std::vector<std::pair<int, int>> ausWave = {{2020, 3}, {2020, 4}, {2021, 1}, {2021, 2}};
    std::vector<std::pair<int, int>> outside = {{2016, 2}, {2017, 3}, {2022, 2}, {2022, 3}, {2023, 1}};
    std::vector<std::pair<int, int>> all = pre;
    all.insert(all.end(), pandemicTail.begin(), pandemicTail.end());
    all.emplace_back(2020, 1);

    const Block blocks[] = {
        {"World news", BodyStyle::CovidCore, "Outbreak briefing", {{2020, 1}}, 200},
        {"World news", BodyStyle::CovidGeneral, "Global response", pandemicTail, 80},
        {"World news", BodyStyle::Generic, "Diplomatic notebook", pre, 20},
        {"Opinion", BodyStyle::CovidGeneral, "Comment", pandemicTail, 40},
        {"Opinion", BodyStyle::CovidCore, "Comment", {{2020, 1}}, 20},
        {"Opinion", BodyStyle::Generic, "Comment", pre, 20},
        {"Australia news", BodyStyle::AusNegative, "State of play", ausWave, 30},
        {"Australia news", BodyStyle::CovidGeneral, "State of play", pandemicTail, 20},
        {"Australia news", BodyStyle::Generic, "State of play", pre, 10},
        {"UK news", BodyStyle::CovidGeneral, "Westminster diary", pandemicTail, 30},
        {"UK news", BodyStyle::CovidCore, "Westminster diary", {{2020, 1}}, 10},
        {"UK news", BodyStyle::Generic, "Westminster diary", pre, 15},
        {"Football", BodyStyle::Sport, "Match report", all, 25},
        {"Sport", BodyStyle::Sport, "Round up", all, 20},
        {"World news", BodyStyle::Generic, "Archive piece", outside, 10},
    };

    for (const Block& b : blocks) {
        for (size_t i = 0; i < b.count; ++i) {
            auto [year, q] = b.quarters[i % b.quarters.size()];
            ArticleRow r;
            r.date = date_in_quarter(rng, year, q);
            r.section = b.section;
            r.title = std::string(b.title_stem) + " " + std::to_string(i + 1);
            r.body = make_body(rng, b.style);
            rows.push_back(std::move(r));
        }
    }
    rng.shuffle(rows);

    CsvWriter w;
    w.write_row({"article_id", "date", "section", "title", "body"});
    for (size_t i = 0; i < rows.size(); ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "g%04zu", i + 1);
        std::string date = rows[i].date;
        if (i % 4 == 0) date += "T09:30:00Z";
        w.write_row({id, date, rows[i].section, rows[i].title, rows[i].body});
    }
    write_file(dir / "articles_mini.csv", w.str());
}

void write_fixture_deaths_impl(const std::filesystem::path& dir) {
    struct Pt {
        const char* quarter;
        uint64_t deaths;
    };
    const Pt au[] = {{"2020-Q1", 102},  {"2020-Q2", 104}, {"2020-Q3", 810},
                     {"2020-Q4", 55},   {"2021-Q1", 4},   {"2021-Q2", 5},
                     {"2021-Q3", 290},  {"2021-Q4", 1420}, {"2022-Q1", 3880}};
    const Pt uk[] = {{"2020-Q1", 2430}, {"2020-Q2", 48100}, {"2020-Q3", 1570},
                     {"2020-Q4", 22800}, {"2021-Q1", 51200}, {"2021-Q2", 2100},
                     {"2021-Q3", 8900}, {"2021-Q4", 10300}, {"2022-Q1", 7900}};
    auto dump = [&](const char* region, const Pt* pts, size_t n, const char* file) {
        CsvWriter w;
        w.write_row({"region", "quarter", "deaths"});
        for (size_t i = 0; i < n; ++i)
            w.write_row({region, pts[i].quarter, std::to_string(pts[i].deaths)});
        write_file(dir / file, w.str());
    };
    dump("australia", au, std::size(au), "deaths_au.csv");
    dump("uk", uk, std::size(uk), "deaths_uk.csv");
}

} // namespace

void write_fixture_tweets(const std::filesystem::path& dir) { write_fixture_tweets_impl(dir); }
void write_fixture_articles(const std::filesystem::path& dir) { write_fixture_articles_impl(dir); }
void write_fixture_deaths(const std::filesystem::path& dir) { write_fixture_deaths_impl(dir); }

void write_all_fixtures(const std::filesystem::path& dir) {
    write_fixture_tweets(dir);
    write_fixture_articles(dir);
    write_fixture_deaths(dir);
}

} // namespace newsent
