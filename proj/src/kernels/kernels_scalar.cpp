#include "newsent/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace newsent {
namespace {

void scale_rows_by_beta(float* C, int M, int N, float beta) {
    if (beta == 1.0f) return;
    std::size_t total = static_cast<std::size_t>(M) * N;
    if (beta == 0.0f) {
        std::fill(C, C + total, 0.0f);
    } else {
        for (std::size_t i = 0; i < total; ++i) C[i] *= beta;
    }
}

void sgemm_nn(int M, int N, int K, float alpha, const float* A, const float* B, float beta,
              float* C) {
    scale_rows_by_beta(C, M, N, beta);
    for (int m = 0; m < M; ++m) {
        const float* a = A + static_cast<std::size_t>(m) * K;
        float* c = C + static_cast<std::size_t>(m) * N;
        for (int k = 0; k < K; ++k) {
            float av = alpha * a[k];
            const float* b = B + static_cast<std::size_t>(k) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

void sgemm_nt(int M, int N, int K, float alpha, const float* A, const float* B, float beta,
              float* C) {
    for (int m = 0; m < M; ++m) {
        const float* a = A + static_cast<std::size_t>(m) * K;
        float* c = C + static_cast<std::size_t>(m) * N;
        for (int n = 0; n < N; ++n) {
            const float* b = B + static_cast<std::size_t>(n) * K;
            float s = 0.0f;
            for (int k = 0; k < K; ++k) s += a[k] * b[k];
            c[n] = alpha * s + (beta == 0.0f ? 0.0f : beta * c[n]);
        }
    }
}

void sgemm_tn(int M, int N, int K, float alpha, const float* A, const float* B, float beta,
              float* C) {
    scale_rows_by_beta(C, M, N, beta);
    for (int k = 0; k < K; ++k) {
        const float* arow = A + static_cast<std::size_t>(k) * M;
        const float* b = B + static_cast<std::size_t>(k) * N;
        for (int m = 0; m < M; ++m) {
            float av = alpha * arow[m];
            float* c = C + static_cast<std::size_t>(m) * N;
            for (int n = 0; n < N; ++n) c[n] += av * b[n];
        }
    }
}

void add_bias_rows(float* x, const float* bias, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* row = x + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) row[c] += bias[c];
    }
}

void bias_grad(const float* dy, float* db, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const float* row = dy + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) db[c] += row[c];
    }
}

void layernorm_fwd(const float* x, const float* gamma, const float* beta, float* y, float* mean,
                   float* rstd, int rows, int cols, float eps) {
    for (int r = 0; r < rows; ++r) {
        const float* xr = x + static_cast<std::size_t>(r) * cols;
        float* yr = y + static_cast<std::size_t>(r) * cols;
        float s = 0.0f;
        for (int c = 0; c < cols; ++c) s += xr[c];
        float mu = s / cols;
        float var = 0.0f;
        for (int c = 0; c < cols; ++c) {
            float d = xr[c] - mu;
            var += d * d;
        }
        var /= cols;
        float rs = 1.0f / std::sqrt(var + eps);
        mean[r] = mu;
        rstd[r] = rs;
        for (int c = 0; c < cols; ++c) yr[c] = (xr[c] - mu) * rs * gamma[c] + beta[c];
    }
}

void layernorm_bwd(const float* x, const float* gamma, const float* mean, const float* rstd,
                   const float* dy, float* dx, float* dgamma, float* dbeta, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const float* xr = x + static_cast<std::size_t>(r) * cols;
        const float* dyr = dy + static_cast<std::size_t>(r) * cols;
        float* dxr = dx + static_cast<std::size_t>(r) * cols;
        float mu = mean[r];
        float rs = rstd[r];
        float s1 = 0.0f, s2 = 0.0f;
        for (int c = 0; c < cols; ++c) {
            float xhat = (xr[c] - mu) * rs;
            float dxhat = dyr[c] * gamma[c];
            s1 += dxhat;
            s2 += dxhat * xhat;
            dgamma[c] += dyr[c] * xhat;
            dbeta[c] += dyr[c];
        }
        float inv = 1.0f / cols;
        for (int c = 0; c < cols; ++c) {
            float xhat = (xr[c] - mu) * rs;
            float dxhat = dyr[c] * gamma[c];
            dxr[c] = rs * (dxhat - s1 * inv - xhat * s2 * inv);
        }
    }
}

void softmax_rows(float* x, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* row = x + static_cast<std::size_t>(r) * cols;
        float mx = row[0];
        for (int c = 1; c < cols; ++c) mx = std::max(mx, row[c]);
        float s = 0.0f;
        for (int c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            s += row[c];
        }
        float inv = 1.0f / s;
        for (int c = 0; c < cols; ++c) row[c] *= inv;
    }
}

void softmax_bwd_rows(const float* p, const float* dp, float* dx, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const float* pr = p + static_cast<std::size_t>(r) * cols;
        const float* dpr = dp + static_cast<std::size_t>(r) * cols;
        float* dxr = dx + static_cast<std::size_t>(r) * cols;
        float s = 0.0f;
        for (int c = 0; c < cols; ++c) s += dpr[c] * pr[c];
        for (int c = 0; c < cols; ++c) dxr[c] = pr[c] * (dpr[c] - s);
    }
}

constexpr float kInvSqrt2 = 0.70710678118654752f;
constexpr float kInvSqrt2Pi = 0.39894228040143268f;

void gelu_fwd(const float* x, float* y, int n) {
    for (int i = 0; i < n; ++i) {
        float v = x[i];
        y[i] = 0.5f * v * (1.0f + std::erf(v * kInvSqrt2));
    }
}

void gelu_bwd(const float* x, const float* dy, float* dx, int n) {
    for (int i = 0; i < n; ++i) {
        float v = x[i];
        float cdf = 0.5f * (1.0f + std::erf(v * kInvSqrt2));
        float pdf = kInvSqrt2Pi * std::exp(-0.5f * v * v);
        dx[i] = dy[i] * (cdf + v * pdf);
    }
}

void sigmoid_vec(const float* x, float* y, int n) {
    for (int i = 0; i < n; ++i) {
        float v = x[i];
        if (v >= 0.0f) {
            float e = std::exp(-v);
            y[i] = 1.0f / (1.0f + e);
        } else {
            float e = std::exp(v);
            y[i] = e / (1.0f + e);
        }
    }
}

float bce_with_logits(const float* logits, const float* targets, float* dlogits, int n) {
    double total = 0.0;
    float inv = 1.0f / n;
    for (int i = 0; i < n; ++i) {
        float x = logits[i];
        float t = targets[i];
        total += std::max(x, 0.0f) - x * t + std::log1p(std::exp(-std::fabs(x)));
        float sig;
        if (x >= 0.0f) {
            float e = std::exp(-x);
            sig = 1.0f / (1.0f + e);
        } else {
            float e = std::exp(x);
            sig = e / (1.0f + e);
        }
        if (dlogits) dlogits[i] = (sig - t) * inv;
    }
    return static_cast<float>(total / n);
}

void adamw_step(float* w, float* m, float* v, const float* g, int n, float lr, float beta1,
                float beta2, float eps, float weight_decay, float bias_c1, float bias_c2) {
    float ic1 = 1.0f / bias_c1;
    float ic2 = 1.0f / bias_c2;
    for (int i = 0; i < n; ++i) {
        float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * gi * gi;
        float mhat = m[i] * ic1;
        float vhat = v[i] * ic2;
        w[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * w[i]);
    }
}

void axpy(int n, float a, const float* x, float* y) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(int n, float a, float* x) {
    for (int i = 0; i < n; ++i) x[i] *= a;
}

float dot(int n, const float* x, const float* y) {
    float s = 0.0f;
    for (int i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

float vsum(int n, const float* x) {
    float s = 0.0f;
    for (int i = 0; i < n; ++i) s += x[i];
    return s;
}

} // namespace

const Kernels& scalar_kernels() {
    static const Kernels k = {
        "scalar",     sgemm_nn,         sgemm_nt,      sgemm_tn,   add_bias_rows,
        bias_grad,    layernorm_fwd,    layernorm_bwd, softmax_rows, softmax_bwd_rows,
        gelu_fwd,     gelu_bwd,         sigmoid_vec,   bce_with_logits,
        adamw_step,   axpy,             scale,         dot,        vsum,
    };
    return k;
}

} // namespace newsent
