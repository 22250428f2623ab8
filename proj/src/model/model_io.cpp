#include "newsent/model.hpp"

#include "newsent/util.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>

namespace newsent {

namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[17] = {};
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[v & 0xF];
        v >>= 4;
    }
    return std::string(buf, 16);
}

std::string read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary(const std::filesystem::path& path, const char* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_env("cannot write " + path.string());
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) fail_env("short write to " + path.string());
}

json encoder_to_json(const EncoderConfig& ec) {
    return json{{"vocab_size", ec.vocab_size},   {"hidden", ec.hidden},
                {"layers", ec.layers},           {"heads", ec.heads},
                {"intermediate", ec.intermediate}, {"max_pos", ec.max_pos},
                {"type_vocab", ec.type_vocab},   {"pos_offset", ec.pos_offset},
                {"ln_eps", ec.ln_eps}};
}

EncoderConfig encoder_from_json(const json& j) {
    EncoderConfig ec;
    ec.vocab_size = j.at("vocab_size").get<int>();
    ec.hidden = j.at("hidden").get<int>();
    ec.layers = j.at("layers").get<int>();
    ec.heads = j.at("heads").get<int>();
    ec.intermediate = j.at("intermediate").get<int>();
    ec.max_pos = j.at("max_pos").get<int>();
    ec.type_vocab = j.at("type_vocab").get<int>();
    ec.pos_offset = j.at("pos_offset").get<int>();
    ec.ln_eps = j.at("ln_eps").get<float>();
    return ec;
}

json train_to_json(const TrainConfig& tc) {
    return json{{"family", encoder_family_name(tc.family)},
                {"max_seq_len", tc.max_seq_len},
                {"batch_size", tc.batch_size},
                {"epochs", tc.epochs},
                {"learning_rate", tc.learning_rate},
                {"weight_decay", tc.weight_decay},
                {"dropout", tc.dropout},
                {"threshold", tc.threshold},
                {"seed", tc.seed},
                {"kernels", tc.kernels}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig tc;
    tc.family = parse_encoder_family(j.at("family").get<std::string>());
    tc.max_seq_len = j.at("max_seq_len").get<int>();
    tc.batch_size = j.at("batch_size").get<int>();
    tc.epochs = j.at("epochs").get<int>();
    tc.learning_rate = j.at("learning_rate").get<double>();
    tc.weight_decay = j.at("weight_decay").get<double>();
    tc.dropout = j.at("dropout").get<float>();
    tc.threshold = j.at("threshold").get<float>();
    tc.seed = j.at("seed").get<std::uint64_t>();
    tc.kernels = j.value("kernels", std::string());
    return tc;
}

struct SafeTensor {
    std::vector<long long> shape;
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct SafeTensorFile {
    std::string bytes;
    std::size_t data_base = 0;
    std::map<std::string, SafeTensor> tensors;
};

SafeTensorFile read_safetensors(const std::filesystem::path& path) {
    SafeTensorFile f;
    f.bytes = read_binary(path);
    if (f.bytes.size() < 8) fail_data(path.string() + ": truncated safetensors header");
    std::uint64_t hlen = 0;
    std::memcpy(&hlen, f.bytes.data(), 8);
    if (8 + hlen > f.bytes.size()) fail_data(path.string() + ": header length out of range");
    json header = json::parse(f.bytes.substr(8, hlen));
    f.data_base = 8 + static_cast<std::size_t>(hlen);
    for (auto& [name, spec] : header.items()) {
        if (name == "__metadata__") continue;
        SafeTensor t;
        std::string dtype = spec.at("dtype").get<std::string>();
        if (dtype != "F32")
            fail_data(path.string() + ": tensor " + name + " has dtype " + dtype +
                      "; only F32 checkpoints are supported");
        t.shape = spec.at("shape").get<std::vector<long long>>();
        auto off = spec.at("data_offsets").get<std::vector<std::size_t>>();
        if (off.size() != 2 || off[1] < off[0] || f.data_base + off[1] > f.bytes.size())
            fail_data(path.string() + ": bad data_offsets for " + name);
        t.begin = off[0];
        t.end = off[1];
        f.tensors[name] = std::move(t);
    }
    return f;
}

// HF checkpoint names for one of our parameter slices, in preference order.
std::vector<std::string> hf_candidates(const std::string& ours, const std::string& prefix,
                                       int /*layers*/) {
    auto cands = [&prefix](std::initializer_list<const char*> tails) {
        std::vector<std::string> v;
        for (const char* t : tails) {
            v.push_back(prefix + t);
            v.push_back(t);
        }
        return v;
    };
    if (ours == "embeddings.word") return cands({"embeddings.word_embeddings.weight"});
    if (ours == "embeddings.position") return cands({"embeddings.position_embeddings.weight"});
    if (ours == "embeddings.token_type")
        return cands({"embeddings.token_type_embeddings.weight"});
    if (ours == "embeddings.ln.gamma")
        return cands({"embeddings.LayerNorm.weight", "embeddings.LayerNorm.gamma"});
    if (ours == "embeddings.ln.beta")
        return cands({"embeddings.LayerNorm.bias", "embeddings.LayerNorm.beta"});
    if (ours == "pooler.w") return cands({"pooler.dense.weight"});
    if (ours == "pooler.b") return cands({"pooler.dense.bias"});

    if (ours.rfind("layer", 0) == 0) {
        std::size_t dot = ours.find('.');
        std::string n = ours.substr(5, dot - 5);
        std::string rest = ours.substr(dot + 1);
        std::string base = "encoder.layer." + n + ".";
        const char* tail = nullptr;
        if (rest == "attn.q.w") tail = "attention.self.query.weight";
        else if (rest == "attn.q.b") tail = "attention.self.query.bias";
        else if (rest == "attn.k.w") tail = "attention.self.key.weight";
        else if (rest == "attn.k.b") tail = "attention.self.key.bias";
        else if (rest == "attn.v.w") tail = "attention.self.value.weight";
        else if (rest == "attn.v.b") tail = "attention.self.value.bias";
        else if (rest == "attn.o.w") tail = "attention.output.dense.weight";
        else if (rest == "attn.o.b") tail = "attention.output.dense.bias";
        else if (rest == "attn.ln.gamma") tail = "attention.output.LayerNorm.weight";
        else if (rest == "attn.ln.beta") tail = "attention.output.LayerNorm.bias";
        else if (rest == "ffn.w1") tail = "intermediate.dense.weight";
        else if (rest == "ffn.b1") tail = "intermediate.dense.bias";
        else if (rest == "ffn.w2") tail = "output.dense.weight";
        else if (rest == "ffn.b2") tail = "output.dense.bias";
        else if (rest == "ffn.ln.gamma") tail = "output.LayerNorm.weight";
        else if (rest == "ffn.ln.beta") tail = "output.LayerNorm.bias";
        if (tail) {
            std::string full = base + tail;
            return {prefix + full, full};
        }
    }
    return {};
}

} // namespace

void Model::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);

    const std::size_t nbytes = params_.total() * sizeof(float);
    const char* wbytes = reinterpret_cast<const char*>(params_.w());
    write_binary(dir / "weights.bin", wbytes, nbytes);
    std::uint64_t wfnv = fnv1a64(std::string_view(wbytes, nbytes));

    std::vector<std::string> tok_files = tok_.save(dir);

    json tensors = json::array();
    for (const ParamEntry& e : params_.entries())
        tensors.push_back(json{{"name", e.name}, {"offset", e.offset}, {"size", e.size}});

    json labels = json::array();
    for (std::string_view n : kLabelNames) labels.push_back(std::string(n));

    json manifest{{"format", "newsent-model"},
                  {"version", kManifestVersion},
                  {"encoder", encoder_to_json(ec_)},
                  {"train", train_to_json(tc_)},
                  {"labels", labels},
                  {"dataset_fingerprint", fingerprint_},
                  {"adam_step", adam_step_},
                  {"param_count", params_.total()},
                  {"tensors", tensors},
                  {"weights_file", "weights.bin"},
                  {"weights_fnv64", hex64(wfnv)},
                  {"tokenizer", json{{"kind", tokenizer_kind_name(tok_.kind())},
                                     {"files", tok_files}}},
                  {"created", created_stamp()}};

    std::string text = manifest.dump(2);
    text.push_back('\n');
    write_binary(dir / "manifest.json", text.data(), text.size());
}

Model Model::load(const std::filesystem::path& model_dir) {
    std::string mtext = read_binary(model_dir / "manifest.json");
    json manifest;
    try {
        manifest = json::parse(mtext);
    } catch (const json::exception& e) {
        fail_data(model_dir.string() + "/manifest.json: " + e.what());
    }
    if (manifest.value("format", std::string()) != "newsent-model")
        fail_data(model_dir.string() + ": not a model directory");
    if (manifest.at("version").get<int>() != kManifestVersion)
        fail_data(model_dir.string() + ": unsupported manifest version");

    EncoderConfig ec = encoder_from_json(manifest.at("encoder"));
    TrainConfig tc = train_from_json(manifest.at("train"));

    json labels = manifest.at("labels");
    if (labels.size() != kNumLabels) fail_data("manifest label order has wrong length");
    for (std::size_t j = 0; j < kNumLabels; ++j)
        if (labels[j].get<std::string>() != kLabelNames[j])
            fail_data("manifest label order differs from this build at index " +
                      std::to_string(j));

    TokenizerKind kind =
        parse_tokenizer_kind(manifest.at("tokenizer").at("kind").get<std::string>());
    SubwordTokenizer tok = SubwordTokenizer::load(model_dir, kind);

    Model m(tc, ec, std::move(tok));
    m.fingerprint_ = manifest.at("dataset_fingerprint").get<std::string>();
    m.adam_step_ = manifest.value("adam_step", std::int64_t{0});

    const json& tensors = manifest.at("tensors");
    const auto& entries = m.params_.entries();
    if (tensors.size() != entries.size())
        fail_data(model_dir.string() + ": tensor table size mismatch");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const json& t = tensors[i];
        if (t.at("name").get<std::string>() != entries[i].name ||
            t.at("offset").get<std::size_t>() != entries[i].offset ||
            t.at("size").get<std::size_t>() != entries[i].size)
            fail_data(model_dir.string() + ": tensor table mismatch at " + entries[i].name);
    }

    std::string wbytes = read_binary(model_dir / manifest.at("weights_file").get<std::string>());
    if (wbytes.size() != m.params_.total() * sizeof(float))
        fail_data(model_dir.string() + ": weights file has " + std::to_string(wbytes.size()) +
                  " bytes, expected " + std::to_string(m.params_.total() * sizeof(float)));
    std::uint64_t wfnv = fnv1a64(wbytes);
    if (hex64(wfnv) != manifest.at("weights_fnv64").get<std::string>())
        fail_data(model_dir.string() + ": weights checksum mismatch");
    std::memcpy(m.params_.w(), wbytes.data(), wbytes.size());
    return m;
}

Model Model::from_pretrained(const std::filesystem::path& checkpoint_dir, const TrainConfig& tc) {
    EncoderConfig ec;
    TokenizerKind kind;
    std::string prefix;
    switch (tc.family) {
    case EncoderFamily::bert_base_uncased:
        ec = EncoderConfig::bert_base();
        kind = TokenizerKind::wordpiece;
        prefix = "bert.";
        break;
    case EncoderFamily::roberta_base:
        ec = EncoderConfig::roberta_base();
        kind = TokenizerKind::byte_bpe;
        prefix = "roberta.";
        break;
    default:
        fail_config("from_pretrained requires a published encoder family");
    }

    SubwordTokenizer tok = SubwordTokenizer::load(checkpoint_dir, kind);
    Model m(tc, ec, std::move(tok));

    std::filesystem::path st_path = checkpoint_dir / "model.safetensors";
    if (!std::filesystem::exists(st_path))
        fail_data("no model.safetensors under " + checkpoint_dir.string());
    m.load_pretrained_weights(st_path, prefix);
    return m;
}

void Model::load_pretrained_weights(const std::filesystem::path& safetensors_path,
                                    const std::string& name_prefix) {
    SafeTensorFile st = read_safetensors(safetensors_path);

    for (const ParamEntry& e : params_.entries()) {
        if (e.name.rfind("head.", 0) == 0) continue; // head always starts fresh
        const SafeTensor* found = nullptr;
        for (const std::string& cand : hf_candidates(e.name, name_prefix, ec_.layers)) {
            auto it = st.tensors.find(cand);
            if (it != st.tensors.end()) {
                found = &it->second;
                break;
            }
        }
        if (!found) {
            if (e.name.rfind("pooler.", 0) == 0) continue; // fresh pooler when absent
            fail_data(safetensors_path.string() + ": no tensor for " + e.name);
        }
        std::size_t count = 1;
        for (long long d : found->shape) count *= static_cast<std::size_t>(d);
        if (count != e.size)
            fail_data(safetensors_path.string() + ": " + e.name + " expects " +
                      std::to_string(e.size) + " floats, checkpoint tensor has " +
                      std::to_string(count));
        if (found->end - found->begin != count * sizeof(float))
            fail_data(safetensors_path.string() + ": byte span mismatch for " + e.name);
        std::memcpy(params_.w(e.offset), st.bytes.data() + st.data_base + found->begin,
                    count * sizeof(float));
    }
}

} // namespace newsent
