#include "newsent/model.hpp"

#include "newsent/util.hpp"

#include <cstring>

namespace newsent {

EncoderFamily parse_encoder_family(const std::string& name) {
    if (name == "bert_base_uncased") return EncoderFamily::bert_base_uncased;
    if (name == "roberta_base") return EncoderFamily::roberta_base;
    if (name == "mini") return EncoderFamily::mini;
    fail_config("unknown encoder family: " + name +
                " (expected bert_base_uncased, roberta_base, or mini)");
}

const char* encoder_family_name(EncoderFamily f) {
    switch (f) {
    case EncoderFamily::bert_base_uncased: return "bert_base_uncased";
    case EncoderFamily::roberta_base: return "roberta_base";
    case EncoderFamily::mini: return "mini";
    }
    return "?";
}

EncoderConfig EncoderConfig::bert_base() {
    EncoderConfig c;
    c.vocab_size = 30522;
    c.hidden = 768;
    c.layers = 12;
    c.heads = 12;
    c.intermediate = 3072;
    c.max_pos = 512;
    c.type_vocab = 2;
    c.pos_offset = 0;
    c.ln_eps = 1e-12f;
    return c;
}

EncoderConfig EncoderConfig::roberta_base() {
    EncoderConfig c;
    c.vocab_size = 50265;
    c.hidden = 768;
    c.layers = 12;
    c.heads = 12;
    c.intermediate = 3072;
    c.max_pos = 514;
    c.type_vocab = 1;
    c.pos_offset = 2;
    c.ln_eps = 1e-5f;
    return c;
}

EncoderConfig EncoderConfig::mini(int vocab_size) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    c.hidden = 64;
    c.layers = 2;
    c.heads = 4;
    c.intermediate = 256;
    c.max_pos = 64;
    c.type_vocab = 2;
    c.pos_offset = 0;
    c.ln_eps = 1e-12f;
    return c;
}

std::size_t encoder_param_count(const EncoderConfig& c) {
    auto H = static_cast<std::size_t>(c.hidden);
    auto I = static_cast<std::size_t>(c.intermediate);
    std::size_t emb = static_cast<std::size_t>(c.vocab_size) * H +
                      static_cast<std::size_t>(c.max_pos) * H +
                      static_cast<std::size_t>(c.type_vocab) * H + 2 * H;
    std::size_t layer = 4 * (H * H + H) + 2 * 2 * H + (I * H + I) + (H * I + H);
    std::size_t pooler = H * H + H;
    return emb + static_cast<std::size_t>(c.layers) * layer + pooler;
}

void TrainConfig::validate(const EncoderConfig& enc) const {
    if (max_seq_len < 16) fail_config("max_seq_len must be at least 16");
    if (max_seq_len + 2 + enc.pos_offset > enc.max_pos)
        fail_config("max_seq_len " + std::to_string(max_seq_len) +
                    " does not fit the encoder position table");
    if (batch_size < 1) fail_config("batch_size must be positive");
    if (epochs < 1) fail_config("epochs must be positive");
    if (!(threshold > 0.0f && threshold < 1.0f)) fail_config("threshold must lie in (0,1)");
    if (!(dropout >= 0.0f && dropout < 1.0f)) fail_config("dropout must lie in [0,1)");
    if (learning_rate < 0.0) fail_config("learning_rate must be non-negative");
    if (enc.hidden % enc.heads != 0) fail_config("hidden size must divide evenly across heads");
}

double TrainConfig::effective_lr() const {
    if (learning_rate > 0.0) return learning_rate;
    switch (family) {
    case EncoderFamily::bert_base_uncased: return 1e-5;
    case EncoderFamily::roberta_base: return 2e-5;
    case EncoderFamily::mini: return 1e-3;
    }
    return 1e-5;
}

LabelVector threshold_scores(const ScoreVector& scores, float t) {
    LabelVector out{};
    for (std::size_t i = 0; i < kNumLabels; ++i) out[i] = scores[i] >= t ? 1 : 0;
    return out;
}

std::size_t ParamStore::add(const std::string& name, std::size_t size) {
    if (finalized_) fail_data("parameter store is already finalized");
    if (index_.count(name)) fail_data("duplicate parameter name: " + name);
    std::size_t offset = total_;
    index_.emplace(name, entries_.size());
    entries_.push_back({name, offset, size});
    total_ += size;
    return offset;
}

void ParamStore::finalize() {
    w_.assign(total_, 0.0f);
    g_.assign(total_, 0.0f);
    m_.assign(total_, 0.0f);
    v_.assign(total_, 0.0f);
    finalized_ = true;
}

const ParamEntry* ParamStore::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const ParamEntry& ParamStore::require(const std::string& name) const {
    if (const ParamEntry* e = find(name)) return *e;
    fail_data("unknown parameter: " + name);
}

void ParamStore::zero_grad() { std::memset(g_.data(), 0, g_.size() * sizeof(float)); }

void Model::build_params() {
    auto H = static_cast<std::size_t>(ec_.hidden);
    auto I = static_cast<std::size_t>(ec_.intermediate);
    params_.add("embeddings.word", static_cast<std::size_t>(ec_.vocab_size) * H);
    params_.add("embeddings.position", static_cast<std::size_t>(ec_.max_pos) * H);
    params_.add("embeddings.token_type", static_cast<std::size_t>(ec_.type_vocab) * H);
    params_.add("embeddings.ln.gamma", H);
    params_.add("embeddings.ln.beta", H);
    for (int l = 0; l < ec_.layers; ++l) {
        std::string p = "layer" + std::to_string(l) + ".";
        for (const char* m : {"q", "k", "v", "o"}) {
            params_.add(p + "attn." + m + ".w", H * H);
            params_.add(p + "attn." + m + ".b", H);
        }
        params_.add(p + "attn.ln.gamma", H);
        params_.add(p + "attn.ln.beta", H);
        params_.add(p + "ffn.w1", I * H);
        params_.add(p + "ffn.b1", I);
        params_.add(p + "ffn.w2", H * I);
        params_.add(p + "ffn.b2", H);
        params_.add(p + "ffn.ln.gamma", H);
        params_.add(p + "ffn.ln.beta", H);
    }
    params_.add("pooler.w", H * H);
    params_.add("pooler.b", H);
    params_.add("head.w", kNumLabels * H);
    params_.add("head.b", kNumLabels);
    params_.finalize();
}

void Model::init_params() {
    Rng rng(tc_.seed);
    for (const ParamEntry& e : params_.entries()) {
        float* p = params_.w(e.offset);
        bool is_gamma = e.name.size() >= 5 && e.name.rfind("gamma") == e.name.size() - 5;
        bool is_bias = (e.name.size() >= 2 && e.name.rfind(".b") == e.name.size() - 2) ||
                       e.name.rfind("beta") != std::string::npos ||
                       e.name.rfind(".b1") != std::string::npos ||
                       e.name.rfind(".b2") != std::string::npos;
        if (is_gamma) {
            for (std::size_t i = 0; i < e.size; ++i) p[i] = 1.0f;
        } else if (is_bias) {
            for (std::size_t i = 0; i < e.size; ++i) p[i] = 0.0f;
        } else {
            for (std::size_t i = 0; i < e.size; ++i)
                p[i] = static_cast<float>(rng.normal() * 0.02);
        }
    }
}

std::size_t Model::encoder_params() const {
    return params_.total() - (kNumLabels * static_cast<std::size_t>(ec_.hidden) + kNumLabels);
}

} // namespace newsent
