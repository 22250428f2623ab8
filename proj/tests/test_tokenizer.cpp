#include <doctest.h>

#include "newsent/tokenizer.hpp"
#include "newsent/util.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace newsent;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("newsent_tok_" + std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::string> pieces_of(const SubwordTokenizer& tok, const std::string& text) {
    std::vector<std::string> out;
    for (int id : tok.encode(text)) out.push_back(tok.piece(id));
    return out;
}

SubwordTokenizer handmade_wordpiece(TempDir& dir) {
    write_file(dir.path / "vocab.txt",
               "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\n"
               "un\n##aff\n##able\n##ably\nhello\nworld\naff\nable\na\nb\nc\n##b\n##c\n");
    return SubwordTokenizer::wordpiece_from_file(dir.path / "vocab.txt");
}

} // namespace

TEST_CASE("wordpiece greedy longest match") {
    TempDir dir;
    SubwordTokenizer tok = handmade_wordpiece(dir);

    CHECK(tok.kind() == TokenizerKind::wordpiece);
    CHECK(tok.vocab_size() == 18);
    CHECK(tok.pad_id() == 0);
    CHECK(tok.unk_id() == 1);
    CHECK(tok.cls_id() == 2);
    CHECK(tok.sep_id() == 3);

    SUBCASE("whole word wins over prefix") {
        CHECK(pieces_of(tok, "able") == std::vector<std::string>{"able"});
        CHECK(pieces_of(tok, "hello world") == std::vector<std::string>{"hello", "world"});
    }
    SUBCASE("continuation pieces") {
        CHECK(pieces_of(tok, "unaffable") == std::vector<std::string>{"un", "##aff", "##able"});
        CHECK(pieces_of(tok, "unaffably") == std::vector<std::string>{"un", "##aff", "##ably"});
    }
    SUBCASE("unmatched remainder maps the whole word to UNK") {
        CHECK(pieces_of(tok, "unaffordable") == std::vector<std::string>{"[UNK]"});
        CHECK(pieces_of(tok, "xyz") == std::vector<std::string>{"[UNK]"});
    }
    SUBCASE("overlong word maps to UNK") {
        std::string huge(101, 'a');
        CHECK(pieces_of(tok, huge) == std::vector<std::string>{"[UNK]"});
    }
    SUBCASE("mixed bare and continuation chars") {
        CHECK(pieces_of(tok, "abc") == std::vector<std::string>{"a", "##b", "##c"});
    }
    SUBCASE("decode reattaches continuations") {
        CHECK(tok.decode(tok.encode("unaffable hello world")) == "unaffable hello world");
        CHECK(tok.decode(tok.encode("a b c")) == "a b c");
    }
    SUBCASE("empty text") {
        CHECK(tok.encode("").empty());
        CHECK(tok.decode({}).empty());
    }
}

TEST_CASE("wordpiece corpus builder") {
    std::vector<std::string> corpus = {
        "the cases are rising in the city",
        "the cases fell today",
        "hope the city recovers",
    };
    SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(corpus, 200);

    SUBCASE("specials come first, then characters, then whole words") {
        CHECK(tok.piece(0) == "[PAD]");
        CHECK(tok.piece(1) == "[UNK]");
        CHECK(tok.piece(2) == "[CLS]");
        CHECK(tok.piece(3) == "[SEP]");
        CHECK(tok.piece(4) == "[MASK]");
        // most frequent multi-char word sits right after the char block
        std::vector<std::string> all;
        for (int i = 0; i < tok.vocab_size(); ++i) all.push_back(tok.piece(i));
        auto pos = [&all](const std::string& s) {
            for (std::size_t i = 0; i < all.size(); ++i)
                if (all[i] == s) return static_cast<long>(i);
            return -1L;
        };
        REQUIRE(pos("the") >= 0);
        REQUIRE(pos("cases") >= 0);
        CHECK(pos("the") < pos("cases"));   // freq 4 beats freq 2
        CHECK(pos("cases") < pos("fell"));  // freq 2 beats freq 1, "cases" < "city" lex
        CHECK(pos("city") < pos("fell"));
    }
    SUBCASE("every corpus word round trips") {
        for (const auto& line : corpus) CHECK(tok.decode(tok.encode(line)) == line);
    }
    SUBCASE("deterministic across rebuilds") {
        SubwordTokenizer tok2 = SubwordTokenizer::wordpiece_from_corpus(corpus, 200);
        REQUIRE(tok2.vocab_size() == tok.vocab_size());
        for (int i = 0; i < tok.vocab_size(); ++i) CHECK(tok2.piece(i) == tok.piece(i));
    }
    SUBCASE("budget caps the vocabulary") {
        SubwordTokenizer small = SubwordTokenizer::wordpiece_from_corpus(corpus, 40);
        CHECK(small.vocab_size() <= 40);
        // unseen-at-budget words degrade to UNK or char pieces but still encode
        CHECK(!small.encode("recovers").empty());
    }
}

TEST_CASE("wordpiece save and load round trip") {
    std::vector<std::string> corpus = {"hope this ends soon", "the cases are rising"};
    SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(corpus, 100);
    TempDir dir;
    std::vector<std::string> files = tok.save(dir.path);
    REQUIRE(files == std::vector<std::string>{"vocab.txt"});

    SubwordTokenizer back = SubwordTokenizer::load(dir.path, TokenizerKind::wordpiece);
    REQUIRE(back.vocab_size() == tok.vocab_size());
    CHECK(back.encode("hope the cases end") == tok.encode("hope the cases end"));

    SUBCASE("saved bytes are stable") {
        std::string first = read_file(dir.path / "vocab.txt");
        TempDir dir2;
        tok.save(dir2.path);
        CHECK(read_file(dir2.path / "vocab.txt") == first);
    }
}

namespace {

SubwordTokenizer handmade_bpe(TempDir& dir) {
    // Ġ is the byte-level marker the space byte maps to.
    write_file(dir.path / "vocab.json",
               R"({"<s>":0,"<pad>":1,"</s>":2,"<unk>":3,)"
               R"("h":4,"e":5,"l":6,"o":7,"he":8,"ll":9,"hell":10,"hello":11,)"
               "\"Ġ\":12,\"Ġhello\":13,"
               R"("Ã":14,"©":15,"w":16})");
    write_file(dir.path / "merges.txt",
               "#version: 0.2\nh e\nl l\nhe ll\nhell o\nĠ hello\n");
    return SubwordTokenizer::bpe_from_files(dir.path / "vocab.json", dir.path / "merges.txt");
}

} // namespace

TEST_CASE("byte level bpe") {
    TempDir dir;
    SubwordTokenizer tok = handmade_bpe(dir);

    CHECK(tok.kind() == TokenizerKind::byte_bpe);
    CHECK(tok.vocab_size() == 17);

    SUBCASE("merge ranks apply lowest first") {
        CHECK(pieces_of(tok, "hello") == std::vector<std::string>{"hello"});
        // second word carries the space marker and merges with it
        CHECK(pieces_of(tok, "hello hello") ==
              std::vector<std::string>{"hello", "Ġhello"});
    }
    SUBCASE("unmerged symbols fall back to single pieces") {
        CHECK(pieces_of(tok, "hell") == std::vector<std::string>{"hell"});
        CHECK(pieces_of(tok, "ho") == std::vector<std::string>{"h", "o"});
    }
    SUBCASE("unknown byte yields unk") {
        CHECK(tok.encode("w")[0] == 16);
        CHECK(pieces_of(tok, "z") == std::vector<std::string>{"<unk>"});
    }
    SUBCASE("multibyte characters ride the byte map") {
        // U+00E9 is bytes c3 a9, which map to pieces Ã and ©
        std::string eacute = "\xc3\xa9";
        CHECK(tok.encode(eacute) == std::vector<int>{14, 15});
        CHECK(tok.decode({14, 15}) == eacute);
    }
    SUBCASE("decode restores the space separator") {
        CHECK(tok.decode(tok.encode("hello hello")) == "hello hello");
        CHECK(tok.decode(tok.encode("hello")) == "hello");
    }
    SUBCASE("save and load round trip") {
        TempDir out;
        std::vector<std::string> files = tok.save(out.path);
        REQUIRE(files == std::vector<std::string>{"vocab.json", "merges.txt"});
        SubwordTokenizer back = SubwordTokenizer::load(out.path, TokenizerKind::byte_bpe);
        REQUIRE(back.vocab_size() == tok.vocab_size());
        CHECK(back.encode("hello hello") == tok.encode("hello hello"));
        CHECK(back.decode(back.encode("hello hello")) == "hello hello");
    }
}

TEST_CASE("tokenizer error paths") {
    TempDir dir;
    SUBCASE("missing wordpiece specials") {
        write_file(dir.path / "vocab.txt", "hello\nworld\n");
        CHECK_THROWS_AS(SubwordTokenizer::wordpiece_from_file(dir.path / "vocab.txt"), Error);
    }
    SUBCASE("missing vocab file") {
        CHECK_THROWS_AS(SubwordTokenizer::wordpiece_from_file(dir.path / "nope.txt"), Error);
    }
    SUBCASE("missing bpe specials") {
        write_file(dir.path / "vocab.json", R"({"h":0,"e":1})");
        write_file(dir.path / "merges.txt", "#version: 0.2\n");
        CHECK_THROWS_AS(
            SubwordTokenizer::bpe_from_files(dir.path / "vocab.json", dir.path / "merges.txt"),
            Error);
    }
    SUBCASE("kind name round trip") {
        CHECK(parse_tokenizer_kind("wordpiece") == TokenizerKind::wordpiece);
        CHECK(parse_tokenizer_kind("byte_bpe") == TokenizerKind::byte_bpe);
        CHECK_THROWS_AS(parse_tokenizer_kind("sentencepiece"), Error);
        CHECK(std::string(tokenizer_kind_name(TokenizerKind::wordpiece)) == "wordpiece");
        CHECK(std::string(tokenizer_kind_name(TokenizerKind::byte_bpe)) == "byte_bpe");
    }
}
