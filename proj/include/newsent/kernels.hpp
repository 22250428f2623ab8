#pragma once

#include <string>

namespace newsent {

// Row-major float kernels backing the model forward/backward passes.
// The scalar set is the reference implementation; vectorized sets must
// agree with it within floating point reassociation tolerance, which the
// equivalence tests enforce.
struct Kernels {
    const char* name;

    // C = alpha*A*B + beta*C, A: MxK, B: KxN, C: MxN
    void (*sgemm_nn)(int M, int N, int K, float alpha, const float* A, const float* B,
                     float beta, float* C);
    // C = alpha*A*B^T + beta*C, A: MxK, B: NxK
    void (*sgemm_nt)(int M, int N, int K, float alpha, const float* A, const float* B,
                     float beta, float* C);
    // C = alpha*A^T*B + beta*C, A: KxM, B: KxN
    void (*sgemm_tn)(int M, int N, int K, float alpha, const float* A, const float* B,
                     float beta, float* C);

    void (*add_bias_rows)(float* x, const float* bias, int rows, int cols);
    // db += column sums of dy
    void (*bias_grad)(const float* dy, float* db, int rows, int cols);

    void (*layernorm_fwd)(const float* x, const float* gamma, const float* beta, float* y,
                          float* mean, float* rstd, int rows, int cols, float eps);
    // dgamma/dbeta accumulate, dx is overwritten
    void (*layernorm_bwd)(const float* x, const float* gamma, const float* mean,
                          const float* rstd, const float* dy, float* dx, float* dgamma,
                          float* dbeta, int rows, int cols);

    void (*softmax_rows)(float* x, int rows, int cols);
    // dx = p .* (dp - rowsum(dp .* p))
    void (*softmax_bwd_rows)(const float* p, const float* dp, float* dx, int rows, int cols);

    void (*gelu_fwd)(const float* x, float* y, int n);
    // dx = dy .* gelu'(x)
    void (*gelu_bwd)(const float* x, const float* dy, float* dx, int n);
    void (*sigmoid_vec)(const float* x, float* y, int n);

    // Returns the mean element loss; dlogits receives the gradient of that
    // mean. Stable for large magnitude logits.
    float (*bce_with_logits)(const float* logits, const float* targets, float* dlogits, int n);

    // Decoupled weight decay; bias_c1/bias_c2 are the precomputed
    // 1-beta^t correction terms for the step.
    void (*adamw_step)(float* w, float* m, float* v, const float* g, int n, float lr,
                       float beta1, float beta2, float eps, float weight_decay, float bias_c1,
                       float bias_c2);

    void (*axpy)(int n, float a, const float* x, float* y);
    void (*scale)(int n, float a, float* x);
    float (*dot)(int n, const float* x, const float* y);
    float (*vsum)(int n, const float* x);
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels(); // defined only when the avx2 unit is built
const Kernels* avx2_kernels_or_null();

bool cpu_has_avx2();

// "scalar", "avx2", or ""/"auto" for detection. Unknown names are a config
// error; requesting avx2 without hardware or binary support is an
// environment error.
std::string resolve_kernel_backend(const std::string& requested, bool has_avx2);
const Kernels& kernels_by_name(const std::string& name);

// Resolved once per process from NEWSENT_KERNELS (auto when unset).
const Kernels& active_kernels();
std::string kernel_backend_name();

} // namespace newsent
