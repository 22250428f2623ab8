#include <doctest.h>

#include "newsent/kernels.hpp"
#include "newsent/model.hpp"
#include "newsent/tokenizer.hpp"
#include "newsent/util.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace newsent;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("newsent_model_" + std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

const std::vector<std::string>& tiny_corpus() {
    static const std::vector<std::string> corpus = {
        "hope this ends soon",          "the cases are rising fast",
        "thank you to every nurse",     "this is a hoax they said",
        "worried about the second wave", "sad news from the hospital",
        "the minister announced rules", "stuck at home laughing",
    };
    return corpus;
}

SubwordTokenizer tiny_tokenizer() {
    return SubwordTokenizer::wordpiece_from_corpus(tiny_corpus(), 160);
}

// Smallest encoder the config validator accepts; scalar kernels so the
// finite difference checks see one deterministic code path.
Model tiny_model(std::uint64_t seed = 7, float dropout = 0.0f) {
    SubwordTokenizer tok = tiny_tokenizer();
    EncoderConfig ec;
    ec.vocab_size = tok.vocab_size();
    ec.hidden = 8;
    ec.layers = 1;
    ec.heads = 2;
    ec.intermediate = 16;
    ec.max_pos = 20;
    ec.type_vocab = 2;
    ec.pos_offset = 0;
    ec.ln_eps = 1e-5f;
    TrainConfig tc;
    tc.family = EncoderFamily::mini;
    tc.max_seq_len = 16;
    tc.batch_size = 2;
    tc.epochs = 1;
    tc.dropout = dropout;
    tc.seed = seed;
    tc.kernels = "scalar";
    return Model(tc, ec, std::move(tok));
}

Model mini_model(std::uint64_t seed = 42, int max_seq_len = 48) {
    SubwordTokenizer tok = tiny_tokenizer();
    EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
    TrainConfig tc;
    tc.family = EncoderFamily::mini;
    tc.max_seq_len = max_seq_len;
    tc.batch_size = 8;
    tc.epochs = 2;
    tc.dropout = 0.1f;
    tc.seed = seed;
    tc.kernels = "scalar";
    return Model(tc, ec, std::move(tok));
}

LabelVector lv(std::initializer_list<int> on) {
    LabelVector v{};
    for (int i : on) v[static_cast<std::size_t>(i)] = 1;
    return v;
}

} // namespace

TEST_CASE("published encoder sizes match their reported parameter counts") {
    CHECK(encoder_param_count(EncoderConfig::bert_base()) == 109482240ULL);
    CHECK(encoder_param_count(EncoderConfig::roberta_base()) == 124645632ULL);
    // the round numbers quoted for these architectures
    CHECK(encoder_param_count(EncoderConfig::bert_base()) / 1000000 == 109);
    CHECK(encoder_param_count(EncoderConfig::roberta_base()) / 1000000 == 124);
}

TEST_CASE("model parameter store") {
    Model m = tiny_model();
    SUBCASE("total splits into encoder and head") {
        std::size_t head = kNumLabels * 8 + kNumLabels;
        CHECK(m.params().total() == m.encoder_params() + head);
        EncoderConfig ec = m.encoder_config();
        CHECK(m.encoder_params() == encoder_param_count(ec));
    }
    SUBCASE("identical config and seed give identical initialization") {
        Model m2 = tiny_model();
        REQUIRE(m2.params().total() == m.params().total());
        CHECK(std::memcmp(m.params().w(), m2.params().w(),
                          m.params().total() * sizeof(float)) == 0);
    }
    SUBCASE("different seed gives different weights") {
        Model m2 = tiny_model(8);
        CHECK(std::memcmp(m.params().w(), m2.params().w(),
                          m.params().total() * sizeof(float)) != 0);
    }
    SUBCASE("layernorm gains start at one, biases at zero") {
        const float* g = m.params().w_of("layer0.attn.ln.gamma");
        const float* b = m.params().w_of("layer0.attn.ln.beta");
        const float* qb = m.params().w_of("layer0.attn.q.b");
        for (int i = 0; i < 8; ++i) {
            CHECK(g[i] == 1.0f);
            CHECK(b[i] == 0.0f);
            CHECK(qb[i] == 0.0f);
        }
    }
}

TEST_CASE("train config validation") {
    SubwordTokenizer tok = tiny_tokenizer();
    EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
    TrainConfig tc;
    tc.family = EncoderFamily::mini;
    tc.max_seq_len = 48;

    SUBCASE("sequence too long for the position table") {
        tc.max_seq_len = 63; // 63 + 2 > 64
        CHECK_THROWS_AS(tc.validate(ec), Error);
    }
    SUBCASE("threshold bounds are exclusive") {
        tc.threshold = 0.0f;
        CHECK_THROWS_AS(tc.validate(ec), Error);
        tc.threshold = 1.0f;
        CHECK_THROWS_AS(tc.validate(ec), Error);
        tc.threshold = 0.5f;
        CHECK_NOTHROW(tc.validate(ec));
    }
    SUBCASE("family default learning rates") {
        CHECK(TrainConfig{EncoderFamily::bert_base_uncased}.effective_lr() == 1e-5);
        CHECK(TrainConfig{EncoderFamily::roberta_base}.effective_lr() == 2e-5);
        CHECK(TrainConfig{EncoderFamily::mini}.effective_lr() == 1e-3);
        TrainConfig overridden;
        overridden.learning_rate = 3e-5;
        CHECK(overridden.effective_lr() == 3e-5);
    }
    SUBCASE("tokenizer and encoder vocabulary must agree") {
        EncoderConfig bad = ec;
        bad.vocab_size = ec.vocab_size + 1;
        CHECK_THROWS_AS(Model(tc, bad, tiny_tokenizer()), Error);
    }
    SUBCASE("unknown kernel backend is a config error") {
        TrainConfig bad = tc;
        bad.kernels = "sse9";
        CHECK_THROWS_AS(Model(bad, ec, tiny_tokenizer()), Error);
    }
    SUBCASE("family name round trip") {
        CHECK(parse_encoder_family("bert_base_uncased") == EncoderFamily::bert_base_uncased);
        CHECK(parse_encoder_family("roberta_base") == EncoderFamily::roberta_base);
        CHECK(parse_encoder_family("mini") == EncoderFamily::mini);
        CHECK_THROWS_AS(parse_encoder_family("distilbert"), Error);
    }
}

TEST_CASE("full backward pass agrees with finite differences") {
    Model m = tiny_model();
    // the stock initialization is too gentle to push meaningful gradients
    // into the lower layers of an 8-wide net, so crank every weight up
    {
        Rng wild(123);
        float* w = m.params().w();
        for (std::size_t i = 0; i < m.params().total(); ++i)
            w[i] = static_cast<float>(wild.normal() * 0.4);
    }
    std::vector<std::vector<int>> ids = {
        m.encode_content("hope this ends soon"),
        m.encode_content("the cases are rising fast"),
    };
    REQUIRE(ids[0].size() >= 3);
    std::vector<LabelVector> targets = {lv({0, 1}), lv({3, 4, 6})};

    m.params().zero_grad();
    float base = m.batch_loss(ids, targets, true, false, 0);
    REQUIRE(std::isfinite(base));
    std::vector<float> grad(m.params().g(), m.params().g() + m.params().total());

    // one index per region of every tensor, plus rows we know the batch touches
    auto fd_at = [&](std::size_t flat) {
        const float h = 5e-3f;
        float saved = m.params().w()[flat];
        m.params().w()[flat] = saved + h;
        float up = m.batch_loss(ids, targets, false, false, 0);
        m.params().w()[flat] = saved - h;
        float down = m.batch_loss(ids, targets, false, false, 0);
        m.params().w()[flat] = saved;
        return (up - down) / (2.0f * h);
    };

    int compared = 0;
    for (const ParamEntry& e : m.params().entries()) {
        std::vector<std::size_t> picks = {0, e.size / 2, e.size - 1};
        if (e.name == "embeddings.word") {
            picks.push_back(static_cast<std::size_t>(ids[0][0]) * 8 + 3);
            picks.push_back(static_cast<std::size_t>(ids[1][2]) * 8 + 5);
        }
        for (std::size_t p : picks) {
            std::size_t flat = e.offset + p;
            float an = grad[flat];
            if (std::fabs(an) < 2e-3f) continue;
            float fd = fd_at(flat);
            CAPTURE(e.name);
            CAPTURE(p);
            CHECK(std::fabs(fd - an) <= 0.025 * std::fabs(an) + 5e-4);
            ++compared;
        }
    }
    // the filter must not have silently skipped everything
    CHECK(compared >= 20);
}

TEST_CASE("head gradients match a double precision oracle") {
    Model m = tiny_model();
    const int H = m.encoder_config().hidden;
    std::string text = "worried about the second wave";
    std::vector<float> pooled = m.pooled_vector(text);
    REQUIRE(static_cast<int>(pooled.size()) == H);

    std::vector<std::vector<int>> ids = {m.encode_content(text)};
    std::vector<LabelVector> targets = {lv({3, 4, 5})};
    m.params().zero_grad();
    m.batch_loss(ids, targets, true, false, 0);

    const float* wf = m.params().w_of("head.w");
    const float* bf = m.params().w_of("head.b");
    const float* gw = m.params().g_of("head.w");
    const float* gb = m.params().g_of("head.b");

    // loss as a double function of the head weights, encoder frozen
    auto loss_of = [&](const std::vector<double>& w, const std::vector<double>& b) {
        double total = 0.0;
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            double z = b[j];
            for (int k = 0; k < H; ++k)
                z += w[j * static_cast<std::size_t>(H) + static_cast<std::size_t>(k)] *
                     static_cast<double>(pooled[static_cast<std::size_t>(k)]);
            double t = targets[0][j];
            // stable log(1+exp)
            double soft = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
            total += soft - t * z;
        }
        return total / static_cast<double>(kNumLabels);
    };

    std::vector<double> w(wf, wf + kNumLabels * static_cast<std::size_t>(H));
    std::vector<double> b(bf, bf + kNumLabels);
    const double h = 1e-6;
    double worst = 0.0;
    for (std::size_t j = 0; j < kNumLabels; ++j) {
        for (int k = 0; k < H; ++k) {
            std::size_t idx = j * static_cast<std::size_t>(H) + static_cast<std::size_t>(k);
            double saved = w[idx];
            w[idx] = saved + h;
            double up = loss_of(w, b);
            w[idx] = saved - h;
            double down = loss_of(w, b);
            w[idx] = saved;
            double fd = (up - down) / (2.0 * h);
            double rel = std::fabs(static_cast<double>(gw[idx]) - fd) /
                         std::max({std::fabs(fd), std::fabs(static_cast<double>(gw[idx])), 1e-6});
            worst = std::max(worst, rel);
        }
        double saved = b[j];
        b[j] = saved + h;
        double up = loss_of(w, b);
        b[j] = saved - h;
        double down = loss_of(w, b);
        b[j] = saved;
        double fd = (up - down) / (2.0 * h);
        double rel = std::fabs(static_cast<double>(gb[j]) - fd) /
                     std::max({std::fabs(fd), std::fabs(static_cast<double>(gb[j])), 1e-6});
        worst = std::max(worst, rel);
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("document chunking") {
    SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(
        {"a b c d e f g h i j"}, 60); // every word is a single piece
    auto words = [](int n) {
        static const char* w[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i) out.push_back(' ');
            out += w[i % 10];
        }
        return out;
    };

    SUBCASE("short document is a single untouched chunk") {
        std::string text = words(150);
        std::vector<std::string> chunks = chunk_document(text, tok, 200, 50);
        REQUIRE(chunks.size() == 1);
        CHECK(chunks[0] == text);
    }
    SUBCASE("window two hundred, stride fifty walks 0 150 300") {
        std::string text = words(400);
        std::vector<std::string> chunks = chunk_document(text, tok, 200, 50);
        REQUIRE(chunks.size() == 3);
        CHECK(tok.encode(chunks[0]).size() == 200);
        CHECK(tok.encode(chunks[1]).size() == 200);
        CHECK(tok.encode(chunks[2]).size() == 100);
        // chunk 2 must start at token 150 and chunk 3 at token 300
        std::vector<int> all = tok.encode(text);
        CHECK(tok.encode(chunks[1]) ==
              std::vector<int>(all.begin() + 150, all.begin() + 350));
        CHECK(tok.encode(chunks[2]) == std::vector<int>(all.begin() + 300, all.end()));
    }
    SUBCASE("one token past the window still makes two chunks") {
        std::string text = words(201);
        std::vector<std::string> chunks = chunk_document(text, tok, 200, 50);
        REQUIRE(chunks.size() == 2);
        CHECK(tok.encode(chunks[1]).size() == 51);
    }
    SUBCASE("zero stride tiles without overlap") {
        std::string text = words(32);
        std::vector<std::string> chunks = chunk_document(text, tok, 16, 0);
        REQUIRE(chunks.size() == 2);
        CHECK(tok.encode(chunks[0]).size() == 16);
        CHECK(tok.encode(chunks[1]).size() == 16);
    }
    SUBCASE("stride must stay below the window") {
        CHECK_THROWS_AS(chunk_document(words(10), tok, 16, 16), Error);
        CHECK_THROWS_AS(chunk_document(words(10), tok, 16, -1), Error);
    }
}

TEST_CASE("document prediction") {
    Model m = mini_model(42, 16);
    auto words = [](int n) {
        static const char* w[] = {"hope", "cases", "rising", "nurse", "hoax",
                                  "wave", "sad",   "rules",  "home",  "soon"};
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i) out.push_back(' ');
            out += w[i % 10];
        }
        return out;
    };

    SUBCASE("single chunk is bitwise the plain prediction") {
        std::string text = "hope this ends soon";
        Prediction p = m.predict_document("a1", text, 4);
        ScoreVector direct = m.predict_scores(text);
        CHECK(p.chunk_count == 1);
        CHECK(std::memcmp(p.scores.data(), direct.data(), sizeof direct) == 0);
        CHECK(p.article_id == "a1");
    }
    SUBCASE("empty body is reported, not scored") {
        Prediction p = m.predict_document("a2", "", 4);
        CHECK(p.chunk_count == 0);
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            CHECK(p.scores[j] == 0.0f);
            CHECK(p.labels[j] == 0);
        }
    }
    SUBCASE("equal chunks average evenly") {
        std::string text = words(32);
        Prediction p = m.predict_document("a3", text, 0);
        REQUIRE(p.chunk_count == 2);
        std::vector<std::string> chunks = chunk_document(text, m.tokenizer(), 16, 0);
        ScoreVector s0 = m.predict_scores(chunks[0]);
        ScoreVector s1 = m.predict_scores(chunks[1]);
        for (std::size_t j = 0; j < kNumLabels; ++j) {
            float want = static_cast<float>(
                (static_cast<double>(s0[j]) + static_cast<double>(s1[j])) / 2.0);
            CHECK(p.scores[j] == doctest::Approx(want).epsilon(1e-6));
        }
    }
    SUBCASE("uneven final chunk is weighted by its token count") {
        std::string text = words(36); // windows of 16, stride 4: 16 + 16 + 12
        Prediction p = m.predict_document("a4", text, 4);
        REQUIRE(p.chunk_count == 3);
        std::vector<std::string> chunks = chunk_document(text, m.tokenizer(), 16, 4);
        double acc[kNumLabels] = {}, wsum = 0.0;
        for (const std::string& c : chunks) {
            double w = static_cast<double>(m.tokenizer().encode(c).size());
            ScoreVector s = m.predict_scores(c);
            wsum += w;
            for (std::size_t j = 0; j < kNumLabels; ++j) acc[j] += w * s[j];
        }
        for (std::size_t j = 0; j < kNumLabels; ++j)
            CHECK(p.scores[j] == doctest::Approx(acc[j] / wsum).epsilon(1e-6));
    }
    SUBCASE("threshold boundary includes the exact value") {
        ScoreVector s{};
        s[0] = 0.5f;
        s[1] = 0.49999f;
        s[2] = 0.50001f;
        LabelVector l = threshold_scores(s, 0.5f);
        CHECK(l[0] == 1);
        CHECK(l[1] == 0);
        CHECK(l[2] == 1);
        CHECK(l[9] == 0);
    }
}

namespace {

std::vector<LabeledTweet> synthetic_tweets(int n, std::uint64_t seed) {
    // label j rides on a dedicated cue phrase so a tiny model can learn it
    static const char* cues[kNumLabels] = {
        "hope this ends soon",      "thank you to every nurse", "we are in this together",
        "it will only get worse",   "worried about the second wave",
        "sad news from the hospital", "the rules make me angry", "this is a hoax they said",
        "the minister announced rules", "stuck at home laughing",
    };
    Rng rng(seed);
    std::vector<LabeledTweet> rows;
    rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        LabeledTweet t;
        std::size_t j = rng.uniform(kNumLabels);
        t.labels[j] = 1;
        t.text = cues[j];
        if (rng.bernoulli(0.3)) {
            std::size_t k = rng.uniform(kNumLabels);
            if (k != j) {
                t.labels[k] = 1;
                t.text += " ";
                t.text += cues[k];
            }
        }
        rows.push_back(std::move(t));
    }
    return rows;
}

Model trained_mini(std::uint64_t seed, const std::vector<LabeledTweet>& rows) {
    std::vector<std::string> texts;
    for (const auto& r : rows) texts.push_back(r.text);
    SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(texts, 200);
    EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
    TrainConfig tc;
    tc.family = EncoderFamily::mini;
    tc.max_seq_len = 24;
    tc.batch_size = 8;
    tc.epochs = 2;
    tc.seed = seed;
    tc.kernels = "scalar";
    Model m(tc, ec, std::move(tok));
    m.train(rows);
    return m;
}

} // namespace

TEST_CASE("training") {
    std::vector<LabeledTweet> rows = synthetic_tweets(48, 11);

    SUBCASE("loss trace is finite, one entry per epoch, and decreasing here") {
        std::vector<std::string> texts;
        for (const auto& r : rows) texts.push_back(r.text);
        SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(texts, 200);
        EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
        TrainConfig tc;
        tc.family = EncoderFamily::mini;
        tc.max_seq_len = 24;
        tc.batch_size = 8;
        tc.epochs = 3;
        tc.seed = 5;
        tc.kernels = "scalar";
        Model m(tc, ec, std::move(tok));
        TrainTrace trace = m.train(rows);
        REQUIRE(trace.epoch_mean_loss.size() == 3);
        for (double l : trace.epoch_mean_loss) CHECK(std::isfinite(l));
        CHECK(trace.epoch_mean_loss[1] < trace.epoch_mean_loss[0]);
        CHECK(trace.epoch_mean_loss[2] < trace.epoch_mean_loss[1]);
        CHECK(m.dataset_fingerprint() != "unset");
    }
    SUBCASE("identical run gives an identical trace and identical weights") {
        std::vector<std::string> texts;
        for (const auto& r : rows) texts.push_back(r.text);
        auto build = [&texts]() {
            SubwordTokenizer tok = SubwordTokenizer::wordpiece_from_corpus(texts, 200);
            EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
            TrainConfig tc;
            tc.family = EncoderFamily::mini;
            tc.max_seq_len = 24;
            tc.batch_size = 8;
            tc.epochs = 2;
            tc.seed = 9;
            tc.kernels = "scalar";
            return Model(tc, ec, std::move(tok));
        };
        Model a = build();
        Model b = build();
        TrainTrace ta = a.train(rows);
        TrainTrace tb = b.train(rows);
        REQUIRE(ta.epoch_mean_loss.size() == tb.epoch_mean_loss.size());
        for (std::size_t i = 0; i < ta.epoch_mean_loss.size(); ++i)
            CHECK(ta.epoch_mean_loss[i] == tb.epoch_mean_loss[i]);
        CHECK(std::memcmp(a.params().w(), b.params().w(),
                          a.params().total() * sizeof(float)) == 0);
        CHECK(a.dataset_fingerprint() == b.dataset_fingerprint());
    }
    SUBCASE("empty training set is a data error") {
        Model m = tiny_model();
        std::vector<LabeledTweet> none;
        CHECK_THROWS_AS(m.train(none), Error);
    }
    SUBCASE("dropout mask depends on the salt") {
        Model m = tiny_model(7, 0.3f);
        std::vector<std::vector<int>> ids = {m.encode_content("hope this ends soon")};
        std::vector<LabelVector> targets = {lv({0})};
        float a = m.batch_loss(ids, targets, false, true, 1);
        float b = m.batch_loss(ids, targets, false, true, 1);
        float c = m.batch_loss(ids, targets, false, true, 2);
        CHECK(a == b);
        CHECK(a != c);
        float eval1 = m.batch_loss(ids, targets, false, false, 1);
        float eval2 = m.batch_loss(ids, targets, false, false, 2);
        CHECK(eval1 == eval2); // no dropout outside training
    }
}

TEST_CASE("model save and load") {
    std::vector<LabeledTweet> rows = synthetic_tweets(24, 3);
    Model m = trained_mini(13, rows);
    TempDir dir;
    m.save(dir.path);

    SUBCASE("round trip preserves weights, config, and predictions") {
        Model back = Model::load(dir.path);
        CHECK(back.params().total() == m.params().total());
        CHECK(std::memcmp(back.params().w(), m.params().w(),
                          m.params().total() * sizeof(float)) == 0);
        CHECK(back.dataset_fingerprint() == m.dataset_fingerprint());
        CHECK(back.train_config().seed == m.train_config().seed);
        CHECK(back.encoder_config().hidden == m.encoder_config().hidden);
        std::string text = "hope this ends soon";
        ScoreVector a = m.predict_scores(text);
        ScoreVector b = back.predict_scores(text);
        CHECK(std::memcmp(a.data(), b.data(), sizeof a) == 0);
    }
    SUBCASE("resave is byte identical") {
        Model back = Model::load(dir.path);
        TempDir dir2;
        back.save(dir2.path);
        CHECK(read_file(dir2.path / "manifest.json") == read_file(dir.path / "manifest.json"));
        CHECK(read_file(dir2.path / "weights.bin") == read_file(dir.path / "weights.bin"));
        CHECK(read_file(dir2.path / "vocab.txt") == read_file(dir.path / "vocab.txt"));
    }
    SUBCASE("corrupted weights are rejected") {
        std::string bytes = read_file(dir.path / "weights.bin");
        bytes[100] = static_cast<char>(bytes[100] ^ 0x1);
        std::ofstream out(dir.path / "weights.bin", std::ios::binary | std::ios::trunc);
        out << bytes;
        out.close();
        CHECK_THROWS_AS(Model::load(dir.path), Error);
    }
    SUBCASE("missing manifest is a data error") {
        TempDir empty;
        CHECK_THROWS_AS(Model::load(empty.path), Error);
    }
}

TEST_CASE("kernel backends agree on predictions") {
    if (!(cpu_has_avx2() && avx2_kernels_or_null())) return;
    SubwordTokenizer tok = tiny_tokenizer();
    EncoderConfig ec = EncoderConfig::mini(tok.vocab_size());
    TrainConfig tc;
    tc.family = EncoderFamily::mini;
    tc.max_seq_len = 48;
    tc.seed = 21;
    tc.kernels = "scalar";
    Model a(tc, ec, tiny_tokenizer());
    tc.kernels = "avx2";
    Model b(tc, ec, tiny_tokenizer());
    REQUIRE(std::memcmp(a.params().w(), b.params().w(),
                        a.params().total() * sizeof(float)) == 0);
    std::string text = "the cases are rising fast and hope this ends soon";
    ScoreVector sa = a.predict_scores(text);
    ScoreVector sb = b.predict_scores(text);
    for (std::size_t j = 0; j < kNumLabels; ++j)
        CHECK(sa[j] == doctest::Approx(sb[j]).epsilon(1e-3));
}

namespace {

struct TensorSpec {
    std::string name;
    std::vector<long long> shape;
    float base;
    std::string dtype = "F32";
};

std::size_t numel(const TensorSpec& t) {
    std::size_t n = 1;
    for (long long d : t.shape) n *= static_cast<std::size_t>(d);
    return n;
}

// minimal checkpoint writer; values are base + index/1000
void write_checkpoint(const fs::path& file, const std::vector<TensorSpec>& tensors) {
    std::string header = "{";
    std::string data;
    for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
        const TensorSpec& t = tensors[ti];
        std::size_t begin = data.size();
        for (std::size_t i = 0; i < numel(t); ++i) {
            float v = t.base + static_cast<float>(i) * 0.001f;
            data.append(reinterpret_cast<const char*>(&v), sizeof v);
        }
        if (ti) header += ",";
        header += "\"" + t.name + "\":{\"dtype\":\"" + t.dtype + "\",\"shape\":[";
        for (std::size_t d = 0; d < t.shape.size(); ++d) {
            if (d) header += ",";
            header += std::to_string(t.shape[d]);
        }
        header += "],\"data_offsets\":[" + std::to_string(begin) + "," +
                  std::to_string(data.size()) + "]}";
    }
    header += "}";
    std::uint64_t hlen = header.size();
    std::string out(reinterpret_cast<const char*>(&hlen), 8);
    out += header;
    out += data;
    write_file(file, out);
}

std::vector<TensorSpec> tiny_checkpoint_tensors(int vocab, const std::string& prefix,
                                                bool with_pooler = true) {
    const long long V = vocab, H = 8, I = 16, P = 20;
    std::vector<TensorSpec> t = {
        {prefix + "embeddings.word_embeddings.weight", {V, H}, 1.0f},
        {prefix + "embeddings.position_embeddings.weight", {P, H}, 2.0f},
        {prefix + "embeddings.token_type_embeddings.weight", {2, H}, 3.0f},
        {prefix + "embeddings.LayerNorm.weight", {H}, 4.0f},
        {prefix + "embeddings.LayerNorm.bias", {H}, 5.0f},
        {prefix + "encoder.layer.0.attention.self.query.weight", {H, H}, 6.0f},
        {prefix + "encoder.layer.0.attention.self.query.bias", {H}, 7.0f},
        {prefix + "encoder.layer.0.attention.self.key.weight", {H, H}, 8.0f},
        {prefix + "encoder.layer.0.attention.self.key.bias", {H}, 9.0f},
        {prefix + "encoder.layer.0.attention.self.value.weight", {H, H}, 10.0f},
        {prefix + "encoder.layer.0.attention.self.value.bias", {H}, 11.0f},
        {prefix + "encoder.layer.0.attention.output.dense.weight", {H, H}, 12.0f},
        {prefix + "encoder.layer.0.attention.output.dense.bias", {H}, 13.0f},
        {prefix + "encoder.layer.0.attention.output.LayerNorm.weight", {H}, 14.0f},
        {prefix + "encoder.layer.0.attention.output.LayerNorm.bias", {H}, 15.0f},
        {prefix + "encoder.layer.0.intermediate.dense.weight", {I, H}, 16.0f},
        {prefix + "encoder.layer.0.intermediate.dense.bias", {I}, 17.0f},
        {prefix + "encoder.layer.0.output.dense.weight", {H, I}, 18.0f},
        {prefix + "encoder.layer.0.output.dense.bias", {H}, 19.0f},
        {prefix + "encoder.layer.0.output.LayerNorm.weight", {H}, 20.0f},
        {prefix + "encoder.layer.0.output.LayerNorm.bias", {H}, 21.0f},
    };
    if (with_pooler) {
        t.push_back({prefix + "pooler.dense.weight", {H, H}, 22.0f});
        t.push_back({prefix + "pooler.dense.bias", {H}, 23.0f});
    }
    return t;
}

} // namespace

TEST_CASE("pretrained checkpoint import") {
    Model fresh = tiny_model();
    const int V = fresh.encoder_config().vocab_size;
    TempDir dir;
    fs::path file = dir.path / "model.safetensors";

    SUBCASE("prefixed tensors land in the right slices, head stays fresh") {
        write_checkpoint(file, tiny_checkpoint_tensors(V, "bert."));
        Model m = tiny_model();
        m.load_pretrained_weights(file, "bert.");

        CHECK(m.params().w_of("embeddings.word")[0] == 1.0f);
        CHECK(m.params().w_of("embeddings.word")[5] == doctest::Approx(1.005f));
        CHECK(m.params().w_of("embeddings.position")[8] == doctest::Approx(2.008f));
        CHECK(m.params().w_of("layer0.attn.k.b")[2] == doctest::Approx(9.002f));
        CHECK(m.params().w_of("layer0.ffn.w2")[127] == doctest::Approx(18.127f));
        CHECK(m.params().w_of("layer0.ffn.ln.gamma")[0] == 20.0f);
        CHECK(m.params().w_of("pooler.b")[7] == doctest::Approx(23.007f));

        const ParamEntry& hw = m.params().require("head.w");
        const ParamEntry& hb = m.params().require("head.b");
        CHECK(std::memcmp(m.params().w(hw.offset), fresh.params().w(hw.offset),
                          hw.size * sizeof(float)) == 0);
        CHECK(std::memcmp(m.params().w(hb.offset), fresh.params().w(hb.offset),
                          hb.size * sizeof(float)) == 0);
    }
    SUBCASE("bare tensor names are found too") {
        write_checkpoint(file, tiny_checkpoint_tensors(V, ""));
        Model m = tiny_model();
        m.load_pretrained_weights(file, "bert.");
        CHECK(m.params().w_of("embeddings.word")[0] == 1.0f);
        CHECK(m.params().w_of("layer0.attn.q.w")[0] == 6.0f);
    }
    SUBCASE("a checkpoint without a pooler keeps the fresh pooler") {
        write_checkpoint(file, tiny_checkpoint_tensors(V, "bert.", false));
        Model m = tiny_model();
        m.load_pretrained_weights(file, "bert.");
        const ParamEntry& pw = m.params().require("pooler.w");
        CHECK(std::memcmp(m.params().w(pw.offset), fresh.params().w(pw.offset),
                          pw.size * sizeof(float)) == 0);
        CHECK(m.params().w_of("embeddings.word")[0] == 1.0f);
    }
    SUBCASE("missing encoder tensor is a data error") {
        auto tensors = tiny_checkpoint_tensors(V, "bert.");
        tensors.erase(tensors.begin() + 5); // query.weight
        write_checkpoint(file, tensors);
        Model m = tiny_model();
        CHECK_THROWS_AS(m.load_pretrained_weights(file, "bert."), Error);
    }
    SUBCASE("shape mismatch is a data error") {
        auto tensors = tiny_checkpoint_tensors(V, "bert.");
        tensors[5].shape = {7, 8};
        write_checkpoint(file, tensors);
        Model m = tiny_model();
        CHECK_THROWS_AS(m.load_pretrained_weights(file, "bert."), Error);
    }
    SUBCASE("non f32 dtype is a data error") {
        auto tensors = tiny_checkpoint_tensors(V, "bert.");
        tensors[0].dtype = "F16";
        write_checkpoint(file, tensors);
        Model m = tiny_model();
        CHECK_THROWS_AS(m.load_pretrained_weights(file, "bert."), Error);
    }
    SUBCASE("truncated file is a data error") {
        write_file(file, std::string("\x08\x00\x00", 3));
        Model m = tiny_model();
        CHECK_THROWS_AS(m.load_pretrained_weights(file, "bert."), Error);
    }
}
