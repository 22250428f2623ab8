#include <doctest.h>

#include "newsent/textprep.hpp"
#include "newsent/util.hpp"

#include <algorithm>

using namespace newsent;

static const CleanLexicons& lex() {
    static CleanLexicons l = CleanLexicons::load(NEWSENT_TEST_DATA_DIR);
    return l;
}

static StopwordPolicy policy(bool extras) {
    return StopwordPolicy::from_data_dir(NEWSENT_TEST_DATA_DIR, extras);
}

TEST_CASE("model cleaning golden cases") {
    CHECK(clean_for_model("Can't wait!! \xF0\x9F\x98\x8A see https://x.y/z", lex()) ==
          "cannot wait smiling face see");
    CHECK(clean_for_model("", lex()) == "");
    CHECK(clean_for_model("HELLO", lex()) == "hello");
}

TEST_CASE("tweet cleaning golden cases") {
    CHECK(clean_tweet("RT @user stay safe :)", lex()) == "stay safe smiley");
    CHECK(clean_tweet("lockdown day 5", lex()) == "lockdown day 5");
    CHECK(clean_tweet("#StayHome", lex()) == "stayhome");
}

TEST_CASE("url removal variants") {
    CHECK(clean_for_model("read http://a.b/c now", lex()) == "read now");
    CHECK(clean_for_model("read HTTPS://A.B/C?q=1 now", lex()) == "read now");
    CHECK(clean_for_model("see www.example.com/page today", lex()) == "see today");
    CHECK(clean_for_model("no links here", lex()) == "no links here");
}

TEST_CASE("mention and hashtag handling") {
    CHECK(clean_for_model("@nhs thank you", lex()) == "thank you");
    CHECK(clean_for_model("thanks @NHS staff", lex()) == "thanks staff");
    CHECK(clean_for_model("#COVID19 cases rise", lex()) == "covid19 cases rise");
    CHECK(clean_for_model("##double", lex()) == "double");
}

TEST_CASE("contraction expansion") {
    CHECK(clean_for_model("I'm sure it's fine, won't panic", lex()) ==
          "i am sure it is fine will not panic");
    CHECK(clean_for_model("they've said she'll recover", lex()) ==
          "they have said she will recover");
    // curly apostrophe normalizes before lookup
    CHECK(clean_for_model("don\xE2\x80\x99t worry", lex()) == "do not worry");
}

TEST_CASE("punctuation and symbol stripping") {
    CHECK(clean_for_model("wait... what?!", lex()) == "wait what");
    CHECK(clean_for_model("cost: $400 (roughly)", lex()) == "cost 400 roughly");
    CHECK(clean_for_model("covid-19 spike", lex()) == "covid 19 spike");
    CHECK(clean_for_model("'quoted words'", lex()) == "quoted words");
    CHECK(clean_for_model("em\xE2\x80\x94" "dash", lex()) == "em dash");
}

TEST_CASE("emoji translation and unknown symbol removal") {
    CHECK(clean_for_model("get well \xF0\x9F\x98\xB7 soon", lex()) ==
          "get well face with medical mask soon");
    CHECK(clean_for_model("cases \xF0\x9F\x93\x88 again", lex()) ==
          "cases chart increasing again");
    // unmapped codepoints vanish entirely
    std::string cleaned = clean_for_model("odd \xF0\x9F\xA7\xBF symbol caf\xC3\xA9", lex());
    CHECK(cleaned == "odd symbol caf");
    for (unsigned char c : cleaned) CHECK(c < 0x80);
}

TEST_CASE("tweet emoticons") {
    CHECK(clean_tweet("bad news today :(", lex()) == "bad news today frowning");
    CHECK(clean_tweet("love this <3", lex()) == "love this heart");
    CHECK(clean_tweet("so sad :'(", lex()) == "so sad crying");
    // emoticon translation is tweet-only
    CHECK(clean_for_model("bad news today :(", lex()) == "bad news today");
}

TEST_CASE("model cleaning is idempotent on the golden corpus") {
    const char* corpus[] = {
        "Can't wait!! \xF0\x9F\x98\x8A see https://x.y/z",
        "",
        "HELLO",
        "RT @user stay safe :)",
        "lockdown day 5",
        "#StayHome",
        "I'm sure it's fine, won't panic",
        "cost: $400 (roughly)",
        "get well \xF0\x9F\x98\xB7 soon",
        "don\xE2\x80\x99t worry",
        "@nhs thank you #NHSheroes",
        "Deaths rose 7% in Q1; see www.stats.gov for data.",
        "'the guardian view' on covid-19: a YEAR like no other",
        "she said: \"it's over\" \xE2\x80\x94 but is it?",
    };
    for (const char* raw : corpus) {
        std::string once = clean_for_model(raw, lex());
        CHECK(clean_for_model(once, lex()) == once);
        std::string tweet_once = clean_tweet(raw, lex());
        CHECK(clean_tweet(tweet_once, lex()) == tweet_once);
    }
}

TEST_CASE("stopword policy loads the six categories") {
    auto p = policy(true);
    REQUIRE(p.extra_categories.size() == 6);
    const char* expected[] = {"action verbs",    "general terms",
                              "modifiers and auxiliaries", "people and entities",
                              "quantifiers and qualifiers", "time-related"};
    std::size_t i = 0;
    for (const auto& [name, words] : p.extra_categories) {
        CHECK(name == expected[i++]);
        CHECK(!words.empty());
    }
    CHECK(p.extra_categories.at("people and entities").count("minster") == 1);
    CHECK(p.extra_categories.at("modifiers and auxiliaries").count("said") == 1);
    CHECK(p.extra_categories.at("time-related").count("year") == 1);
    CHECK(p.base.count("the") == 1);
    CHECK(p.base.count("public") == 0);
}

TEST_CASE("ngram tokenization golden cases") {
    CHECK(tokenize_for_ngrams("the public health said", policy(true)) ==
          std::vector<std::string>{"public", "health"});
    CHECK(tokenize_for_ngrams("public health", policy(false)) ==
          std::vector<std::string>{"public", "health"});
    CHECK(tokenize_for_ngrams("year week month", policy(true)).empty());
    CHECK(tokenize_for_ngrams("year week month", policy(false)) ==
          std::vector<std::string>{"year", "week", "month"});
    // pure numerals drop, alphanumerics stay
    CHECK(tokenize_for_ngrams("covid19 cases rose 400 percent", policy(true)) ==
          std::vector<std::string>{"covid19", "cases", "rose", "percent"});
}

TEST_CASE("no active stop word survives tokenization") {
    auto p = policy(true);
    std::vector<std::string> pool = {"public",  "health",  "the",   "said",  "vaccine",
                                     "year",    "outbreak", "and",   "minster", "cases",
                                     "of",      "lockdown", "good",  "will",  "quarantine"};
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        std::string sentence;
        int len = 1 + static_cast<int>(rng.uniform(12));
        for (int i = 0; i < len; ++i) {
            if (i) sentence += ' ';
            sentence += pool[rng.uniform(static_cast<std::uint32_t>(pool.size()))];
        }
        for (const std::string& tok : tokenize_for_ngrams(sentence, p)) {
            CHECK_FALSE(p.is_stopword(tok));
        }
    }
}

TEST_CASE("extras-on output is a subsequence of extras-off output") {
    auto on = policy(true);
    auto off = policy(false);
    std::vector<std::string> pool = {"public", "health", "the", "said", "vaccine", "year",
                                     "outbreak", "and", "government", "cases", "lockdown"};
    Rng rng(56);
    for (int trial = 0; trial < 100; ++trial) {
        std::string sentence;
        int len = 1 + static_cast<int>(rng.uniform(15));
        for (int i = 0; i < len; ++i) {
            if (i) sentence += ' ';
            sentence += pool[rng.uniform(static_cast<std::uint32_t>(pool.size()))];
        }
        auto a = tokenize_for_ngrams(sentence, on);
        auto b = tokenize_for_ngrams(sentence, off);
        std::size_t j = 0;
        for (const std::string& tok : a) {
            while (j < b.size() && b[j] != tok) ++j;
            REQUIRE(j < b.size());
            ++j;
        }
    }
}
