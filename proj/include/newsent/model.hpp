#pragma once

#include "newsent/labels.hpp"
#include "newsent/senwave.hpp"
#include "newsent/tokenizer.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace newsent {

struct Kernels;

enum class EncoderFamily { bert_base_uncased, roberta_base, mini };

EncoderFamily parse_encoder_family(const std::string& name);
const char* encoder_family_name(EncoderFamily f);

struct EncoderConfig {
    int vocab_size = 0;
    int hidden = 0;
    int layers = 0;
    int heads = 0;
    int intermediate = 0;
    int max_pos = 0;
    int type_vocab = 2;
    int pos_offset = 0; // roberta position ids start past the padding slot
    float ln_eps = 1e-12f;

    static EncoderConfig bert_base();
    static EncoderConfig roberta_base();
    static EncoderConfig mini(int vocab_size);
};

// Embeddings + layers + pooler, excluding the classification head.
std::size_t encoder_param_count(const EncoderConfig& c);

struct TrainConfig {
    EncoderFamily family = EncoderFamily::bert_base_uncased;
    // Content subwords per sequence; [CLS]/[SEP] ride on top.
    int max_seq_len = 200;
    int batch_size = 8;
    int epochs = 4;
    double learning_rate = 0.0; // 0 selects the family default
    double weight_decay = 0.01;
    float dropout = 0.3f; // on the pooled output
    float threshold = 0.5f;
    std::uint64_t seed = 42;
    std::string kernels; // "", "auto", "scalar", "avx2"

    void validate(const EncoderConfig& enc) const;
    double effective_lr() const;
};

struct TrainTrace {
    std::vector<double> epoch_mean_loss;
};

struct Prediction {
    std::string article_id;
    ScoreVector scores{};
    LabelVector labels{};
    int chunk_count = 0;
};

LabelVector threshold_scores(const ScoreVector& scores, float t);

// Sliding windows of max_seq_len content tokens with step max_seq_len-stride;
// the final partial window is kept; a short document yields one chunk.
std::vector<std::string> chunk_document(const std::string& cleaned_text,
                                        const SubwordTokenizer& tok, int max_seq_len, int stride);

struct ParamEntry {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

// One contiguous float arena per role (weights, grads, adam moments) with
// named slices. Names are stable and serialized in the model manifest.
class ParamStore {
public:
    std::size_t add(const std::string& name, std::size_t size);
    void finalize();

    const std::vector<ParamEntry>& entries() const { return entries_; }
    const ParamEntry* find(const std::string& name) const;
    const ParamEntry& require(const std::string& name) const;
    std::size_t total() const { return total_; }

    float* w(std::size_t offset = 0) { return w_.data() + offset; }
    const float* w(std::size_t offset = 0) const { return w_.data() + offset; }
    float* g(std::size_t offset = 0) { return g_.data() + offset; }
    float* m(std::size_t offset = 0) { return m_.data() + offset; }
    float* v(std::size_t offset = 0) { return v_.data() + offset; }

    float* w_of(const std::string& name) { return w(require(name).offset); }
    const float* w_of(const std::string& name) const { return w(require(name).offset); }
    float* g_of(const std::string& name) { return g(require(name).offset); }

    void zero_grad();

private:
    std::vector<ParamEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> w_, g_, m_, v_;
    std::size_t total_ = 0;
    bool finalized_ = false;
};

struct EncoderWorkspace;

class Model {
public:
    Model(const TrainConfig& tc, const EncoderConfig& ec, SubwordTokenizer tok);
    Model(Model&&) noexcept;
    Model& operator=(Model&&) noexcept;
    ~Model();

    // Reads a converted pretrained checkpoint directory (f32 safetensors +
    // tokenizer files); the classification head is freshly initialized.
    static Model from_pretrained(const std::filesystem::path& checkpoint_dir,
                                 const TrainConfig& tc);
    static Model load(const std::filesystem::path& model_dir);
    void save(const std::filesystem::path& dir) const;

    // Overlays encoder weights from an f32 safetensors checkpoint using the
    // usual released-checkpoint tensor names, bare or under name_prefix
    // (e.g. "bert."). The head keeps its fresh values, as does the pooler
    // when the checkpoint lacks one.
    void load_pretrained_weights(const std::filesystem::path& safetensors_path,
                                 const std::string& name_prefix);

    const TrainConfig& train_config() const { return tc_; }
    const EncoderConfig& encoder_config() const { return ec_; }
    const SubwordTokenizer& tokenizer() const { return tok_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::size_t encoder_params() const;
    const std::string& dataset_fingerprint() const { return fingerprint_; }

    TrainTrace train(const std::vector<LabeledTweet>& train_set);

    ScoreVector predict_scores(const std::string& cleaned_text) const;
    std::vector<ScoreVector> predict_scores_batch(const std::vector<std::string>& texts) const;
    Prediction predict_document(const std::string& article_id, const std::string& cleaned_body,
                                int stride) const;

    // Content ids truncated to max_seq_len, no specials.
    std::vector<int> encode_content(const std::string& cleaned_text) const;

    // Post-pooler document embedding (the vector the head scores).
    std::vector<float> pooled_vector(const std::string& cleaned_text) const;

    // Mean element BCE over the batch; fills grads when with_grad. Exposed
    // for the training loop and the gradient tests.
    float batch_loss(const std::vector<std::vector<int>>& content_ids,
                     const std::vector<LabelVector>& targets, bool with_grad, bool train_mode,
                     std::uint64_t dropout_salt);

private:
    Model() = default;
    void build_params();
    void init_params();
    void forward_scores(const std::vector<std::vector<int>>& content_ids, float* scores_out) const;

    TrainConfig tc_;
    EncoderConfig ec_;
    SubwordTokenizer tok_;
    ParamStore params_;
    const Kernels* kern_ = nullptr;
    std::string fingerprint_ = "unset";
    std::int64_t adam_step_ = 0;
    mutable std::unique_ptr<EncoderWorkspace> ws_;
};

} // namespace newsent
