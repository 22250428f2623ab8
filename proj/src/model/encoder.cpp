#include "newsent/model.hpp"

#include "newsent/kernels.hpp"
#include "newsent/util.hpp"

#include <cmath>
#include <cstring>

namespace newsent {

namespace {

void ensure(std::vector<float>& v, std::size_t n) {
    if (v.size() < n) v.resize(n);
}

// [B*T, H] -> [B, A, T, dh]
void split_heads(const float* src, float* dst, int B, int T, int A, int dh) {
    int H = A * dh;
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < T; ++t)
            for (int a = 0; a < A; ++a)
                std::memcpy(dst + (((static_cast<std::size_t>(b) * A + a) * T + t) * dh),
                            src + (static_cast<std::size_t>(b) * T + t) * H + a * dh,
                            static_cast<std::size_t>(dh) * sizeof(float));
}

// [B, A, T, dh] -> [B*T, H]
void merge_heads(const float* src, float* dst, int B, int T, int A, int dh) {
    int H = A * dh;
    for (int b = 0; b < B; ++b)
        for (int t = 0; t < T; ++t)
            for (int a = 0; a < A; ++a)
                std::memcpy(dst + (static_cast<std::size_t>(b) * T + t) * H + a * dh,
                            src + (((static_cast<std::size_t>(b) * A + a) * T + t) * dh),
                            static_cast<std::size_t>(dh) * sizeof(float));
}

} // namespace

struct LayerCache {
    std::vector<float> h_in, qh, kh, vh, probs, ctx_m, r1, mean1, rstd1, h1, u, gact, r2, mean2,
        rstd2;
};

struct EncoderWorkspace {
    int B = 0, T = 0;
    std::vector<int> ids;
    std::vector<int> lens;
    std::vector<float> targets;
    std::vector<float> emb_sum, emb_mean, emb_rstd;
    std::vector<float> h;
    std::vector<LayerCache> layers;
    std::vector<float> pooled_in, pp, pooled, drop_mask, pooled_drop, logits, probs_out, dlogits;
    // scratch
    std::vector<float> lin, ctxh, dh, dbuf, dhead, dheadT, dscores, dprobs, du, dg, dr;
};

Model::Model(const TrainConfig& tc, const EncoderConfig& ec, SubwordTokenizer tok)
    : tc_(tc), ec_(ec), tok_(std::move(tok)), ws_(std::make_unique<EncoderWorkspace>()) {
    tc_.validate(ec_);
    if (tok_.vocab_size() != ec_.vocab_size)
        fail_data("tokenizer vocabulary (" + std::to_string(tok_.vocab_size()) +
                  ") does not match encoder vocab_size (" + std::to_string(ec_.vocab_size) + ")");
    kern_ = tc_.kernels.empty()
                ? &active_kernels()
                : &kernels_by_name(resolve_kernel_backend(tc_.kernels, cpu_has_avx2()));
    build_params();
    init_params();
}

Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;
Model::~Model() = default;

std::vector<int> Model::encode_content(const std::string& cleaned_text) const {
    std::vector<int> ids = tok_.encode(cleaned_text);
    if (ids.size() > static_cast<std::size_t>(tc_.max_seq_len))
        ids.resize(static_cast<std::size_t>(tc_.max_seq_len));
    return ids;
}

// Assembles padded input rows, runs the full encoder forward pass, and
// leaves logits in ws. Caches everything backward() needs.
void Model::forward_scores(const std::vector<std::vector<int>>& content_ids,
                           float* /*unused*/) const {
    const Kernels& K = *kern_;
    EncoderWorkspace& ws = *ws_;
    const int B = static_cast<int>(content_ids.size());
    int maxc = 1;
    for (const auto& c : content_ids) maxc = std::max(maxc, static_cast<int>(c.size()));
    const int T = maxc + 2;
    const int H = ec_.hidden;
    const int A = ec_.heads;
    const int dh = H / A;
    const int I = ec_.intermediate;
    const std::size_t BT = static_cast<std::size_t>(B) * T;

    ws.B = B;
    ws.T = T;
    ws.ids.assign(BT, tok_.pad_id());
    ws.lens.assign(static_cast<std::size_t>(B), 0);
    for (int b = 0; b < B; ++b) {
        const auto& c = content_ids[static_cast<std::size_t>(b)];
        int* row = ws.ids.data() + static_cast<std::size_t>(b) * T;
        row[0] = tok_.cls_id();
        for (std::size_t i = 0; i < c.size(); ++i) row[1 + i] = c[i];
        row[1 + c.size()] = tok_.sep_id();
        ws.lens[static_cast<std::size_t>(b)] = static_cast<int>(c.size()) + 2;
    }

    ensure(ws.emb_sum, BT * H);
    ensure(ws.emb_mean, BT);
    ensure(ws.emb_rstd, BT);
    ensure(ws.h, BT * H);
    const float* wword = params_.w_of("embeddings.word");
    const float* wpos = params_.w_of("embeddings.position");
    const float* wtype = params_.w_of("embeddings.token_type");
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < T; ++t) {
            float* dst = ws.emb_sum.data() + (static_cast<std::size_t>(b) * T + t) * H;
            const float* we = wword + static_cast<std::size_t>(ws.ids[static_cast<std::size_t>(b) * T + t]) * H;
            const float* pe = wpos + static_cast<std::size_t>(t + ec_.pos_offset) * H;
            for (int i = 0; i < H; ++i) dst[i] = we[i] + pe[i] + wtype[i];
        }
    }
    K.layernorm_fwd(ws.emb_sum.data(), params_.w_of("embeddings.ln.gamma"),
                    params_.w_of("embeddings.ln.beta"), ws.h.data(), ws.emb_mean.data(),
                    ws.emb_rstd.data(), static_cast<int>(BT), H, ec_.ln_eps);

    ws.layers.resize(static_cast<std::size_t>(ec_.layers));
    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));
    ensure(ws.lin, BT * static_cast<std::size_t>(std::max(H, I)));
    ensure(ws.ctxh, BT * H);

    for (int l = 0; l < ec_.layers; ++l) {
        LayerCache& c = ws.layers[static_cast<std::size_t>(l)];
        std::string p = "layer" + std::to_string(l) + ".";
        ensure(c.h_in, BT * H);
        std::memcpy(c.h_in.data(), ws.h.data(), BT * H * sizeof(float));

        ensure(c.qh, BT * H);
        ensure(c.kh, BT * H);
        ensure(c.vh, BT * H);
        for (const char* m : {"q", "k", "v"}) {
            K.sgemm_nt(static_cast<int>(BT), H, H, 1.0f, c.h_in.data(),
                       params_.w_of(p + "attn." + m + ".w"), 0.0f, ws.lin.data());
            K.add_bias_rows(ws.lin.data(), params_.w_of(p + "attn." + m + ".b"),
                            static_cast<int>(BT), H);
            float* dst = m[0] == 'q' ? c.qh.data() : m[0] == 'k' ? c.kh.data() : c.vh.data();
            split_heads(ws.lin.data(), dst, B, T, A, dh);
        }

        ensure(c.probs, static_cast<std::size_t>(B) * A * T * T);
        for (int b = 0; b < B; ++b) {
            for (int a = 0; a < A; ++a) {
                std::size_t off = ((static_cast<std::size_t>(b) * A + a) * T) * dh;
                float* S = c.probs.data() + ((static_cast<std::size_t>(b) * A + a) * T) * T;
                K.sgemm_nt(T, T, dh, inv_sqrt_dh, c.qh.data() + off, c.kh.data() + off, 0.0f, S);
                int len = ws.lens[static_cast<std::size_t>(b)];
                for (int tq = 0; tq < T; ++tq)
                    for (int tk = len; tk < T; ++tk) S[static_cast<std::size_t>(tq) * T + tk] -= 1e9f;
                K.softmax_rows(S, T, T);
                K.sgemm_nn(T, dh, T, 1.0f, S, c.vh.data() + off, 0.0f, ws.ctxh.data() + off);
            }
        }
        ensure(c.ctx_m, BT * H);
        merge_heads(ws.ctxh.data(), c.ctx_m.data(), B, T, A, dh);

        K.sgemm_nt(static_cast<int>(BT), H, H, 1.0f, c.ctx_m.data(), params_.w_of(p + "attn.o.w"),
                   0.0f, ws.lin.data());
        K.add_bias_rows(ws.lin.data(), params_.w_of(p + "attn.o.b"), static_cast<int>(BT), H);

        ensure(c.r1, BT * H);
        std::memcpy(c.r1.data(), c.h_in.data(), BT * H * sizeof(float));
        K.axpy(static_cast<int>(BT * H), 1.0f, ws.lin.data(), c.r1.data());

        ensure(c.h1, BT * H);
        ensure(c.mean1, BT);
        ensure(c.rstd1, BT);
        K.layernorm_fwd(c.r1.data(), params_.w_of(p + "attn.ln.gamma"),
                        params_.w_of(p + "attn.ln.beta"), c.h1.data(), c.mean1.data(),
                        c.rstd1.data(), static_cast<int>(BT), H, ec_.ln_eps);

        ensure(c.u, BT * static_cast<std::size_t>(I));
        K.sgemm_nt(static_cast<int>(BT), I, H, 1.0f, c.h1.data(), params_.w_of(p + "ffn.w1"), 0.0f,
                   c.u.data());
        K.add_bias_rows(c.u.data(), params_.w_of(p + "ffn.b1"), static_cast<int>(BT), I);
        ensure(c.gact, BT * static_cast<std::size_t>(I));
        K.gelu_fwd(c.u.data(), c.gact.data(), static_cast<int>(BT * static_cast<std::size_t>(I)));

        K.sgemm_nt(static_cast<int>(BT), H, I, 1.0f, c.gact.data(), params_.w_of(p + "ffn.w2"),
                   0.0f, ws.lin.data());
        K.add_bias_rows(ws.lin.data(), params_.w_of(p + "ffn.b2"), static_cast<int>(BT), H);

        ensure(c.r2, BT * H);
        std::memcpy(c.r2.data(), c.h1.data(), BT * H * sizeof(float));
        K.axpy(static_cast<int>(BT * H), 1.0f, ws.lin.data(), c.r2.data());

        ensure(c.mean2, BT);
        ensure(c.rstd2, BT);
        K.layernorm_fwd(c.r2.data(), params_.w_of(p + "ffn.ln.gamma"),
                        params_.w_of(p + "ffn.ln.beta"), ws.h.data(), c.mean2.data(),
                        c.rstd2.data(), static_cast<int>(BT), H, ec_.ln_eps);
    }

    ensure(ws.pooled_in, static_cast<std::size_t>(B) * H);
    for (int b = 0; b < B; ++b)
        std::memcpy(ws.pooled_in.data() + static_cast<std::size_t>(b) * H,
                    ws.h.data() + static_cast<std::size_t>(b) * T * H,
                    static_cast<std::size_t>(H) * sizeof(float));

    ensure(ws.pp, static_cast<std::size_t>(B) * H);
    K.sgemm_nt(B, H, H, 1.0f, ws.pooled_in.data(), params_.w_of("pooler.w"), 0.0f, ws.pp.data());
    K.add_bias_rows(ws.pp.data(), params_.w_of("pooler.b"), B, H);
    ensure(ws.pooled, static_cast<std::size_t>(B) * H);
    for (std::size_t i = 0; i < static_cast<std::size_t>(B) * H; ++i)
        ws.pooled[i] = std::tanh(ws.pp[i]);

    ensure(ws.logits, static_cast<std::size_t>(B) * kNumLabels);
}

float Model::batch_loss(const std::vector<std::vector<int>>& content_ids,
                        const std::vector<LabelVector>& targets, bool with_grad, bool train_mode,
                        std::uint64_t dropout_salt) {
    const Kernels& K = *kern_;
    EncoderWorkspace& ws = *ws_;
    forward_scores(content_ids, nullptr);
    const int B = ws.B;
    const int T = ws.T;
    const int H = ec_.hidden;
    const int A = ec_.heads;
    const int dh = H / A;
    const int I = ec_.intermediate;
    const std::size_t BT = static_cast<std::size_t>(B) * T;
    const std::size_t BH = static_cast<std::size_t>(B) * H;

    ensure(ws.drop_mask, BH);
    ensure(ws.pooled_drop, BH);
    if (train_mode && tc_.dropout > 0.0f) {
        Rng drng(tc_.seed ^ (0x9E3779B97F4A7C15ULL * (dropout_salt + 1)));
        float keep = 1.0f - tc_.dropout;
        for (std::size_t i = 0; i < BH; ++i)
            ws.drop_mask[i] = drng.uniform01() < keep ? 1.0f / keep : 0.0f;
    } else {
        for (std::size_t i = 0; i < BH; ++i) ws.drop_mask[i] = 1.0f;
    }
    for (std::size_t i = 0; i < BH; ++i) ws.pooled_drop[i] = ws.pooled[i] * ws.drop_mask[i];

    K.sgemm_nt(B, kNumLabels, H, 1.0f, ws.pooled_drop.data(), params_.w_of("head.w"), 0.0f,
               ws.logits.data());
    K.add_bias_rows(ws.logits.data(), params_.w_of("head.b"), B, kNumLabels);

    ensure(ws.targets, static_cast<std::size_t>(B) * kNumLabels);
    for (int b = 0; b < B; ++b)
        for (std::size_t j = 0; j < kNumLabels; ++j)
            ws.targets[static_cast<std::size_t>(b) * kNumLabels + j] =
                static_cast<float>(targets[static_cast<std::size_t>(b)][j]);

    ensure(ws.dlogits, static_cast<std::size_t>(B) * kNumLabels);
    float loss = K.bce_with_logits(ws.logits.data(), ws.targets.data(), ws.dlogits.data(),
                                   static_cast<int>(static_cast<std::size_t>(B) * kNumLabels));
    if (!with_grad) return loss;

    // head
    K.sgemm_tn(kNumLabels, H, B, 1.0f, ws.dlogits.data(), ws.pooled_drop.data(), 1.0f,
               params_.g_of("head.w"));
    K.bias_grad(ws.dlogits.data(), params_.g_of("head.b"), B, kNumLabels);
    ensure(ws.dhead, BH);
    K.sgemm_nn(B, H, kNumLabels, 1.0f, ws.dlogits.data(), params_.w_of("head.w"), 0.0f,
               ws.dhead.data());

    // dropout and tanh
    for (std::size_t i = 0; i < BH; ++i) {
        float dpooled = ws.dhead[i] * ws.drop_mask[i];
        ws.dhead[i] = dpooled * (1.0f - ws.pooled[i] * ws.pooled[i]);
    }

    // pooler
    K.sgemm_tn(H, H, B, 1.0f, ws.dhead.data(), ws.pooled_in.data(), 1.0f,
               params_.g_of("pooler.w"));
    K.bias_grad(ws.dhead.data(), params_.g_of("pooler.b"), B, H);
    ensure(ws.dheadT, BH);
    K.sgemm_nn(B, H, H, 1.0f, ws.dhead.data(), params_.w_of("pooler.w"), 0.0f, ws.dheadT.data());

    ensure(ws.dh, BT * H);
    std::memset(ws.dh.data(), 0, BT * H * sizeof(float));
    for (int b = 0; b < B; ++b)
        std::memcpy(ws.dh.data() + static_cast<std::size_t>(b) * T * H,
                    ws.dheadT.data() + static_cast<std::size_t>(b) * H,
                    static_cast<std::size_t>(H) * sizeof(float));

    ensure(ws.dr, BT * H);
    ensure(ws.dbuf, BT * static_cast<std::size_t>(std::max(H, I)));
    ensure(ws.du, BT * static_cast<std::size_t>(I));
    ensure(ws.dg, BT * static_cast<std::size_t>(I));
    ensure(ws.dscores, static_cast<std::size_t>(B) * A * T * T);
    ensure(ws.dprobs, static_cast<std::size_t>(B) * A * T * T);
    std::vector<float>& dqh = ws.lin;
    ensure(dqh, BT * H);
    std::vector<float> dkh(BT * H), dvh(BT * H), dctxh(BT * H), dmerged(BT * H);

    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));

    for (int l = ec_.layers - 1; l >= 0; --l) {
        LayerCache& c = ws.layers[static_cast<std::size_t>(l)];
        std::string p = "layer" + std::to_string(l) + ".";

        // ffn layernorm
        K.layernorm_bwd(c.r2.data(), params_.w_of(p + "ffn.ln.gamma"), c.mean2.data(),
                        c.rstd2.data(), ws.dh.data(), ws.dr.data(),
                        params_.g_of(p + "ffn.ln.gamma"), params_.g_of(p + "ffn.ln.beta"),
                        static_cast<int>(BT), H);

        // ffn second linear
        K.sgemm_tn(H, I, static_cast<int>(BT), 1.0f, ws.dr.data(), c.gact.data(), 1.0f,
                   params_.g_of(p + "ffn.w2"));
        K.bias_grad(ws.dr.data(), params_.g_of(p + "ffn.b2"), static_cast<int>(BT), H);
        K.sgemm_nn(static_cast<int>(BT), I, H, 1.0f, ws.dr.data(), params_.w_of(p + "ffn.w2"),
                   0.0f, ws.dg.data());
        K.gelu_bwd(c.u.data(), ws.dg.data(), ws.du.data(),
                   static_cast<int>(BT * static_cast<std::size_t>(I)));

        // ffn first linear
        K.sgemm_tn(I, H, static_cast<int>(BT), 1.0f, ws.du.data(), c.h1.data(), 1.0f,
                   params_.g_of(p + "ffn.w1"));
        K.bias_grad(ws.du.data(), params_.g_of(p + "ffn.b1"), static_cast<int>(BT), I);
        K.sgemm_nn(static_cast<int>(BT), H, I, 1.0f, ws.du.data(), params_.w_of(p + "ffn.w1"),
                   0.0f, ws.dbuf.data());
        K.axpy(static_cast<int>(BT * H), 1.0f, ws.dr.data(), ws.dbuf.data()); // residual

        // attention layernorm
        K.layernorm_bwd(c.r1.data(), params_.w_of(p + "attn.ln.gamma"), c.mean1.data(),
                        c.rstd1.data(), ws.dbuf.data(), ws.dr.data(),
                        params_.g_of(p + "attn.ln.gamma"), params_.g_of(p + "attn.ln.beta"),
                        static_cast<int>(BT), H);

        // attention output projection
        K.sgemm_tn(H, H, static_cast<int>(BT), 1.0f, ws.dr.data(), c.ctx_m.data(), 1.0f,
                   params_.g_of(p + "attn.o.w"));
        K.bias_grad(ws.dr.data(), params_.g_of(p + "attn.o.b"), static_cast<int>(BT), H);
        K.sgemm_nn(static_cast<int>(BT), H, H, 1.0f, ws.dr.data(), params_.w_of(p + "attn.o.w"),
                   0.0f, dmerged.data());
        split_heads(dmerged.data(), dctxh.data(), B, T, A, dh);

        for (int b = 0; b < B; ++b) {
            for (int a = 0; a < A; ++a) {
                std::size_t off = ((static_cast<std::size_t>(b) * A + a) * T) * dh;
                std::size_t soff = ((static_cast<std::size_t>(b) * A + a) * T) * T;
                const float* P = c.probs.data() + soff;
                K.sgemm_nt(T, T, dh, 1.0f, dctxh.data() + off, c.vh.data() + off, 0.0f,
                           ws.dprobs.data() + soff);
                K.sgemm_tn(T, dh, T, 1.0f, P, dctxh.data() + off, 0.0f, dvh.data() + off);
                K.softmax_bwd_rows(P, ws.dprobs.data() + soff, ws.dscores.data() + soff, T, T);
                K.sgemm_nn(T, dh, T, inv_sqrt_dh, ws.dscores.data() + soff, c.kh.data() + off,
                           0.0f, dqh.data() + off);
                K.sgemm_tn(T, dh, T, inv_sqrt_dh, ws.dscores.data() + soff, c.qh.data() + off,
                           0.0f, dkh.data() + off);
            }
        }

        // dh for the previous layer starts as the residual path
        std::memcpy(ws.dh.data(), ws.dr.data(), BT * H * sizeof(float));
        for (const char* m : {"q", "k", "v"}) {
            const float* dsplit = m[0] == 'q' ? dqh.data() : m[0] == 'k' ? dkh.data() : dvh.data();
            merge_heads(dsplit, dmerged.data(), B, T, A, dh);
            K.sgemm_tn(H, H, static_cast<int>(BT), 1.0f, dmerged.data(), c.h_in.data(), 1.0f,
                       params_.g_of(p + "attn." + m + ".w"));
            K.bias_grad(dmerged.data(), params_.g_of(p + "attn." + m + ".b"),
                        static_cast<int>(BT), H);
            K.sgemm_nn(static_cast<int>(BT), H, H, 1.0f, dmerged.data(),
                       params_.w_of(p + "attn." + m + ".w"), 1.0f, ws.dh.data());
        }
    }

    // embedding layernorm and scatter
    K.layernorm_bwd(ws.emb_sum.data(), params_.w_of("embeddings.ln.gamma"), ws.emb_mean.data(),
                    ws.emb_rstd.data(), ws.dh.data(), ws.dr.data(),
                    params_.g_of("embeddings.ln.gamma"), params_.g_of("embeddings.ln.beta"),
                    static_cast<int>(BT), H);
    float* gword = params_.g_of("embeddings.word");
    float* gpos = params_.g_of("embeddings.position");
    float* gtype = params_.g_of("embeddings.token_type");
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < T; ++t) {
            const float* src = ws.dr.data() + (static_cast<std::size_t>(b) * T + t) * H;
            float* gw = gword + static_cast<std::size_t>(ws.ids[static_cast<std::size_t>(b) * T + t]) * H;
            float* gp = gpos + static_cast<std::size_t>(t + ec_.pos_offset) * H;
            for (int i = 0; i < H; ++i) {
                gw[i] += src[i];
                gp[i] += src[i];
                gtype[i] += src[i];
            }
        }
    }
    return loss;
}

std::vector<float> Model::pooled_vector(const std::string& cleaned_text) const {
    std::vector<std::vector<int>> ids{encode_content(cleaned_text)};
    forward_scores(ids, nullptr);
    const float* p = ws_->pooled.data();
    return std::vector<float>(p, p + ec_.hidden);
}

ScoreVector Model::predict_scores(const std::string& cleaned_text) const {
    std::vector<std::string> one{cleaned_text};
    return predict_scores_batch(one)[0];
}

std::vector<ScoreVector> Model::predict_scores_batch(const std::vector<std::string>& texts) const {
    const Kernels& K = *kern_;
    std::vector<ScoreVector> out;
    out.reserve(texts.size());
    const std::size_t kChunk = 32;
    for (std::size_t start = 0; start < texts.size(); start += kChunk) {
        std::size_t n = std::min(kChunk, texts.size() - start);
        std::vector<std::vector<int>> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = encode_content(texts[start + i]);
        forward_scores(ids, nullptr);
        EncoderWorkspace& ws = *ws_;
        const int H = ec_.hidden;
        K.sgemm_nt(static_cast<int>(n), kNumLabels, H, 1.0f, ws.pooled.data(),
                   params_.w_of("head.w"), 0.0f, ws.logits.data());
        K.add_bias_rows(ws.logits.data(), params_.w_of("head.b"), static_cast<int>(n),
                        kNumLabels);
        ensure(ws.probs_out, n * kNumLabels);
        K.sigmoid_vec(ws.logits.data(), ws.probs_out.data(),
                      static_cast<int>(n * kNumLabels));
        for (std::size_t i = 0; i < n; ++i) {
            ScoreVector s{};
            for (std::size_t j = 0; j < kNumLabels; ++j)
                s[j] = ws.probs_out[i * kNumLabels + j];
            out.push_back(s);
        }
    }
    return out;
}

} // namespace newsent
