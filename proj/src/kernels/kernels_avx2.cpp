#include "newsent/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <immintrin.h>

namespace newsent {
namespace {

inline float hsum256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

inline float hmax256(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_max_ps(lo, hi);
    __m128 shuf = _mm_shuffle_ps(lo, lo, _MM_SHUFFLE(2, 3, 0, 1));
    lo = _mm_max_ps(lo, shuf);
    shuf = _mm_shuffle_ps(lo, lo, _MM_SHUFFLE(1, 0, 3, 2));
    lo = _mm_max_ps(lo, shuf);
    return _mm_cvtss_f32(lo);
}

// Cephes style single precision exp, accurate to a few ulp over the
// clamped range, which is plenty for softmax and sigmoid.
inline __m256 exp256_ps(__m256 x) {
    const __m256 one = _mm256_set1_ps(1.0f);
    x = _mm256_min_ps(x, _mm256_set1_ps(88.3762626647949f));
    x = _mm256_max_ps(x, _mm256_set1_ps(-88.3762626647949f));
    __m256 fx = _mm256_fmadd_ps(x, _mm256_set1_ps(1.44269504088896341f), _mm256_set1_ps(0.5f));
    fx = _mm256_floor_ps(fx);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
    x = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), x);
    __m256 z = _mm256_mul_ps(x, x);
    __m256 y = _mm256_set1_ps(1.9875691500e-4f);
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.3981999507e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(8.3334519073e-3f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(4.1665795894e-2f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(1.6666665459e-1f));
    y = _mm256_fmadd_ps(y, x, _mm256_set1_ps(5.0000001201e-1f));
    y = _mm256_fmadd_ps(y, z, x);
    y = _mm256_add_ps(y, one);
    __m256i emm0 = _mm256_cvttps_epi32(fx);
    emm0 = _mm256_add_epi32(emm0, _mm256_set1_epi32(0x7f));
    emm0 = _mm256_slli_epi32(emm0, 23);
    return _mm256_mul_ps(y, _mm256_castsi256_ps(emm0));
}

void scale_rows_by_beta(float* C, int M, int N, float beta) {
    if (beta == 1.0f) return;
    std::size_t total = static_cast<std::size_t>(M) * N;
    if (beta == 0.0f) {
        std::fill(C, C + total, 0.0f);
        return;
    }
    __m256 b = _mm256_set1_ps(beta);
    std::size_t i = 0;
    for (; i + 8 <= total; i += 8)
        _mm256_storeu_ps(C + i, _mm256_mul_ps(_mm256_loadu_ps(C + i), b));
    for (; i < total; ++i) C[i] *= beta;
}

void sgemm_nn(int M, int N, int K, float alpha, const float* A, const float* B, float beta,
              float* C) {
    scale_rows_by_beta(C, M, N, beta);
    for (int m = 0; m < M; ++m) {
        const float* a = A + static_cast<std::size_t>(m) * K;
        float* c = C + static_cast<std::size_t>(m) * N;
        for (int k = 0; k < K; ++k) {
            float av = alpha * a[k];
            __m256 avv = _mm256_set1_ps(av);
            const float* b = B + static_cast<std::size_t>(k) * N;
            int n = 0;
            for (; n + 8 <= N; n += 8) {
                __m256 cv = _mm256_loadu_ps(c + n);
                cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(b + n), cv);
                _mm256_storeu_ps(c + n, cv);
            }
            for (; n < N; ++n) c[n] += av * b[n];
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
            __m256 acc = _mm256_setzero_ps();
            int k = 0;
            for (; k + 8 <= K; k += 8)
                acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + k), _mm256_loadu_ps(b + k), acc);
            float s = hsum256(acc);
            for (; k < K; ++k) s += a[k] * b[k];
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
            __m256 avv = _mm256_set1_ps(av);
            float* c = C + static_cast<std::size_t>(m) * N;
            int n = 0;
            for (; n + 8 <= N; n += 8) {
                __m256 cv = _mm256_loadu_ps(c + n);
                cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(b + n), cv);
                _mm256_storeu_ps(c + n, cv);
            }
            for (; n < N; ++n) c[n] += av * b[n];
        }
    }
}

void add_bias_rows(float* x, const float* bias, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        float* row = x + static_cast<std::size_t>(r) * cols;
        int c = 0;
        for (; c + 8 <= cols; c += 8)
            _mm256_storeu_ps(row + c,
                             _mm256_add_ps(_mm256_loadu_ps(row + c), _mm256_loadu_ps(bias + c)));
        for (; c < cols; ++c) row[c] += bias[c];
    }
}

void bias_grad(const float* dy, float* db, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const float* row = dy + static_cast<std::size_t>(r) * cols;
        int c = 0;
        for (; c + 8 <= cols; c += 8)
            _mm256_storeu_ps(db + c,
                             _mm256_add_ps(_mm256_loadu_ps(db + c), _mm256_loadu_ps(row + c)));
        for (; c < cols; ++c) db[c] += row[c];
    }
}

void layernorm_fwd(const float* x, const float* gamma, const float* beta, float* y, float* mean,
                   float* rstd, int rows, int cols, float eps) {
    for (int r = 0; r < rows; ++r) {
        const float* xr = x + static_cast<std::size_t>(r) * cols;
        float* yr = y + static_cast<std::size_t>(r) * cols;
        __m256 acc = _mm256_setzero_ps();
        int c = 0;
        for (; c + 8 <= cols; c += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(xr + c));
        float s = hsum256(acc);
        for (; c < cols; ++c) s += xr[c];
        float mu = s / cols;

        __m256 muv = _mm256_set1_ps(mu);
        __m256 vacc = _mm256_setzero_ps();
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 d = _mm256_sub_ps(_mm256_loadu_ps(xr + c), muv);
            vacc = _mm256_fmadd_ps(d, d, vacc);
        }
        float var = hsum256(vacc);
        for (; c < cols; ++c) {
            float d = xr[c] - mu;
            var += d * d;
        }
        var /= cols;
        float rs = 1.0f / std::sqrt(var + eps);
        mean[r] = mu;
        rstd[r] = rs;

        __m256 rsv = _mm256_set1_ps(rs);
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(xr + c), muv), rsv);
            __m256 out = _mm256_fmadd_ps(xhat, _mm256_loadu_ps(gamma + c), _mm256_loadu_ps(beta + c));
            _mm256_storeu_ps(yr + c, out);
        }
        for (; c < cols; ++c) yr[c] = (xr[c] - mu) * rs * gamma[c] + beta[c];
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
        __m256 muv = _mm256_set1_ps(mu);
        __m256 rsv = _mm256_set1_ps(rs);
        __m256 s1v = _mm256_setzero_ps();
        __m256 s2v = _mm256_setzero_ps();
        int c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(xr + c), muv), rsv);
            __m256 dyv = _mm256_loadu_ps(dyr + c);
            __m256 dxhat = _mm256_mul_ps(dyv, _mm256_loadu_ps(gamma + c));
            s1v = _mm256_add_ps(s1v, dxhat);
            s2v = _mm256_fmadd_ps(dxhat, xhat, s2v);
            _mm256_storeu_ps(dgamma + c,
                             _mm256_fmadd_ps(dyv, xhat, _mm256_loadu_ps(dgamma + c)));
            _mm256_storeu_ps(dbeta + c, _mm256_add_ps(_mm256_loadu_ps(dbeta + c), dyv));
        }
        float s1 = hsum256(s1v);
        float s2 = hsum256(s2v);
        for (; c < cols; ++c) {
            float xhat = (xr[c] - mu) * rs;
            float dxhat = dyr[c] * gamma[c];
            s1 += dxhat;
            s2 += dxhat * xhat;
            dgamma[c] += dyr[c] * xhat;
            dbeta[c] += dyr[c];
        }
        float inv = 1.0f / cols;
        __m256 s1m = _mm256_set1_ps(s1 * inv);
        __m256 s2m = _mm256_set1_ps(s2 * inv);
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 xhat = _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(xr + c), muv), rsv);
            __m256 dxhat = _mm256_mul_ps(_mm256_loadu_ps(dyr + c), _mm256_loadu_ps(gamma + c));
            __m256 t = _mm256_sub_ps(_mm256_sub_ps(dxhat, s1m), _mm256_mul_ps(xhat, s2m));
            _mm256_storeu_ps(dxr + c, _mm256_mul_ps(rsv, t));
        }
        for (; c < cols; ++c) {
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
        int c = 0;
        if (cols >= 8) {
            __m256 mxv = _mm256_loadu_ps(row);
            for (c = 8; c + 8 <= cols; c += 8) mxv = _mm256_max_ps(mxv, _mm256_loadu_ps(row + c));
            mx = hmax256(mxv);
        }
        for (; c < cols; ++c) mx = std::max(mx, row[c]);

        __m256 mxb = _mm256_set1_ps(mx);
        __m256 acc = _mm256_setzero_ps();
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 e = exp256_ps(_mm256_sub_ps(_mm256_loadu_ps(row + c), mxb));
            _mm256_storeu_ps(row + c, e);
            acc = _mm256_add_ps(acc, e);
        }
        float s = hsum256(acc);
        for (; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            s += row[c];
        }
        float inv = 1.0f / s;
        __m256 invv = _mm256_set1_ps(inv);
        c = 0;
        for (; c + 8 <= cols; c += 8)
            _mm256_storeu_ps(row + c, _mm256_mul_ps(_mm256_loadu_ps(row + c), invv));
        for (; c < cols; ++c) row[c] *= inv;
    }
}

void softmax_bwd_rows(const float* p, const float* dp, float* dx, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const float* pr = p + static_cast<std::size_t>(r) * cols;
        const float* dpr = dp + static_cast<std::size_t>(r) * cols;
        float* dxr = dx + static_cast<std::size_t>(r) * cols;
        __m256 acc = _mm256_setzero_ps();
        int c = 0;
        for (; c + 8 <= cols; c += 8)
            acc = _mm256_fmadd_ps(_mm256_loadu_ps(dpr + c), _mm256_loadu_ps(pr + c), acc);
        float s = hsum256(acc);
        for (; c < cols; ++c) s += dpr[c] * pr[c];
        __m256 sv = _mm256_set1_ps(s);
        c = 0;
        for (; c + 8 <= cols; c += 8) {
            __m256 t = _mm256_sub_ps(_mm256_loadu_ps(dpr + c), sv);
            _mm256_storeu_ps(dxr + c, _mm256_mul_ps(_mm256_loadu_ps(pr + c), t));
        }
        for (; c < cols; ++c) dxr[c] = pr[c] * (dpr[c] - s);
    }
}

void sigmoid_vec(const float* x, float* y, int n) {
    const __m256 one = _mm256_set1_ps(1.0f);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(x + i);
        __m256 e = exp256_ps(_mm256_sub_ps(_mm256_setzero_ps(), v));
        _mm256_storeu_ps(y + i, _mm256_div_ps(one, _mm256_add_ps(one, e)));
    }
    for (; i < n; ++i) {
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

void adamw_step(float* w, float* m, float* v, const float* g, int n, float lr, float beta1,
                float beta2, float eps, float weight_decay, float bias_c1, float bias_c2) {
    const __m256 b1 = _mm256_set1_ps(beta1);
    const __m256 b2 = _mm256_set1_ps(beta2);
    const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 ic1 = _mm256_set1_ps(1.0f / bias_c1);
    const __m256 ic2 = _mm256_set1_ps(1.0f / bias_c2);
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 epsv = _mm256_set1_ps(eps);
    const __m256 wdv = _mm256_set1_ps(weight_decay);
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 gi = _mm256_loadu_ps(g + i);
        __m256 mi = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i), _mm256_mul_ps(ob1, gi));
        __m256 vi = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i),
                                    _mm256_mul_ps(ob2, _mm256_mul_ps(gi, gi)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        __m256 mhat = _mm256_mul_ps(mi, ic1);
        __m256 vhat = _mm256_mul_ps(vi, ic2);
        __m256 wi = _mm256_loadu_ps(w + i);
        __m256 upd = _mm256_add_ps(
            _mm256_div_ps(mhat, _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv)),
            _mm256_mul_ps(wdv, wi));
        _mm256_storeu_ps(w + i, _mm256_fnmadd_ps(lrv, upd, wi));
    }
    float sic1 = 1.0f / bias_c1;
    float sic2 = 1.0f / bias_c2;
    for (; i < n; ++i) {
        float gi = g[i];
        m[i] = beta1 * m[i] + (1.0f - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0f - beta2) * gi * gi;
        float mhat = m[i] * sic1;
        float vhat = v[i] * sic2;
        w[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * w[i]);
    }
}

void axpy(int n, float a, const float* x, float* y) {
    __m256 av = _mm256_set1_ps(a);
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i,
                         _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(int n, float a, float* x) {
    __m256 av = _mm256_set1_ps(a);
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(x + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), av));
    for (; i < n; ++i) x[i] *= a;
}

float dot(int n, const float* x, const float* y) {
    __m256 acc = _mm256_setzero_ps();
    int i = 0;
    for (; i + 8 <= n; i += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
    float s = hsum256(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

float vsum(int n, const float* x) {
    __m256 acc = _mm256_setzero_ps();
    int i = 0;
    for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
    float s = hsum256(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

} // namespace

const Kernels& avx2_kernels() {
    static const Kernels k = [] {
        Kernels t = scalar_kernels(); // gelu and bce stay scalar, tiny workloads
        t.name = "avx2";
        t.sgemm_nn = sgemm_nn;
        t.sgemm_nt = sgemm_nt;
        t.sgemm_tn = sgemm_tn;
        t.add_bias_rows = add_bias_rows;
        t.bias_grad = bias_grad;
        t.layernorm_fwd = layernorm_fwd;
        t.layernorm_bwd = layernorm_bwd;
        t.softmax_rows = softmax_rows;
        t.softmax_bwd_rows = softmax_bwd_rows;
        t.sigmoid_vec = sigmoid_vec;
        t.adamw_step = adamw_step;
        t.axpy = axpy;
        t.scale = scale;
        t.dot = dot;
        t.vsum = vsum;
        return t;
    }();
    return k;
}

} // namespace newsent

#endif
