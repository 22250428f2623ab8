#include <doctest.h>

#include "newsent/kernels.hpp"
#include "newsent/util.hpp"

#include <cmath>
#include <cstring>
#include <vector>

using namespace newsent;

namespace {

std::vector<const Kernels*> backends() {
    std::vector<const Kernels*> out = {&scalar_kernels()};
    if (cpu_has_avx2() && avx2_kernels_or_null()) out.push_back(avx2_kernels_or_null());
    return out;
}

std::vector<float> randn(Rng& rng, std::size_t n, float scale = 1.0f) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal()) * scale;
    return v;
}

bool close(float a, double b, double atol = 1e-4, double rtol = 1e-4) {
    return std::fabs(a - b) <= atol + rtol * std::fabs(b);
}

void check_all_close(const std::vector<float>& got, const std::vector<double>& want,
                     double atol = 1e-4, double rtol = 1e-4) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        INFO("index ", i, " got ", got[i], " want ", want[i]);
        CHECK(close(got[i], want[i], atol, rtol));
    }
}

// double precision references

std::vector<double> ref_gemm(char mode, int M, int N, int K, float alpha, const float* A,
                             const float* B, float beta, const float* C0) {
    std::vector<double> C(static_cast<std::size_t>(M) * N);
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) {
            double s = 0.0;
            for (int k = 0; k < K; ++k) {
                double a, b;
                if (mode == 'n') { // A MxK, B KxN
                    a = A[static_cast<std::size_t>(m) * K + k];
                    b = B[static_cast<std::size_t>(k) * N + n];
                } else if (mode == 't') { // nt: A MxK, B NxK
                    a = A[static_cast<std::size_t>(m) * K + k];
                    b = B[static_cast<std::size_t>(n) * K + k];
                } else { // tn: A KxM, B KxN
                    a = A[static_cast<std::size_t>(k) * M + m];
                    b = B[static_cast<std::size_t>(k) * N + n];
                }
                s += a * b;
            }
            std::size_t idx = static_cast<std::size_t>(m) * N + n;
            C[idx] = alpha * s + (beta == 0.0f ? 0.0 : double(beta) * C0[idx]);
        }
    }
    return C;
}

double ref_gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double ref_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

TEST_CASE("gemm variants match a double precision reference") {
    Rng rng(42);
    struct Size {
        int M, N, K;
    };
    for (Size sz : {Size{1, 1, 1}, Size{3, 5, 7}, Size{8, 8, 8}, Size{13, 9, 17},
                    Size{32, 24, 40}, Size{5, 64, 3}}) {
        auto A_nn = randn(rng, static_cast<std::size_t>(sz.M) * sz.K);
        auto B_nn = randn(rng, static_cast<std::size_t>(sz.K) * sz.N);
        auto B_nt = randn(rng, static_cast<std::size_t>(sz.N) * sz.K);
        auto A_tn = randn(rng, static_cast<std::size_t>(sz.K) * sz.M);
        auto C0 = randn(rng, static_cast<std::size_t>(sz.M) * sz.N);
        struct AB {
            float alpha, beta;
        };
        for (AB ab : {AB{1.0f, 0.0f}, AB{0.5f, 1.0f}, AB{2.0f, 0.5f}}) {
            for (const Kernels* k : backends()) {
                INFO("backend ", k->name, " M=", sz.M, " N=", sz.N, " K=", sz.K,
                     " alpha=", ab.alpha, " beta=", ab.beta);
                auto C = C0;
                k->sgemm_nn(sz.M, sz.N, sz.K, ab.alpha, A_nn.data(), B_nn.data(), ab.beta,
                            C.data());
                check_all_close(C, ref_gemm('n', sz.M, sz.N, sz.K, ab.alpha, A_nn.data(),
                                            B_nn.data(), ab.beta, C0.data()));

                C = C0;
                k->sgemm_nt(sz.M, sz.N, sz.K, ab.alpha, A_nn.data(), B_nt.data(), ab.beta,
                            C.data());
                check_all_close(C, ref_gemm('t', sz.M, sz.N, sz.K, ab.alpha, A_nn.data(),
                                            B_nt.data(), ab.beta, C0.data()));

                C = C0;
                k->sgemm_tn(sz.M, sz.N, sz.K, ab.alpha, A_tn.data(), B_nn.data(), ab.beta,
                            C.data());
                check_all_close(C, ref_gemm('x', sz.M, sz.N, sz.K, ab.alpha, A_tn.data(),
                                            B_nn.data(), ab.beta, C0.data()));
            }
        }
    }
}

TEST_CASE("bias kernels") {
    Rng rng(7);
    int rows = 9, cols = 21;
    auto x0 = randn(rng, static_cast<std::size_t>(rows) * cols);
    auto bias = randn(rng, cols);
    for (const Kernels* k : backends()) {
        auto x = x0;
        k->add_bias_rows(x.data(), bias.data(), rows, cols);
        std::vector<double> want(x0.size());
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                want[static_cast<std::size_t>(r) * cols + c] =
                    double(x0[static_cast<std::size_t>(r) * cols + c]) + bias[c];
        check_all_close(x, want, 1e-6, 1e-6);

        std::vector<float> db(cols, 0.25f);
        k->bias_grad(x0.data(), db.data(), rows, cols);
        std::vector<double> wantdb(cols, 0.25);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                wantdb[c] += x0[static_cast<std::size_t>(r) * cols + c];
        check_all_close(db, wantdb, 1e-5, 1e-5);
    }
}

TEST_CASE("layernorm forward and backward match references") {
    Rng rng(11);
    int rows = 7, cols = 37;
    float eps = 1e-5f;
    auto x = randn(rng, static_cast<std::size_t>(rows) * cols, 2.0f);
    auto gamma = randn(rng, cols);
    auto beta = randn(rng, cols);
    auto dy = randn(rng, static_cast<std::size_t>(rows) * cols);

    for (const Kernels* k : backends()) {
        std::vector<float> y(x.size()), mean(rows), rstd(rows);
        k->layernorm_fwd(x.data(), gamma.data(), beta.data(), y.data(), mean.data(), rstd.data(),
                         rows, cols, eps);

        std::vector<double> wy(x.size()), wmean(rows), wrstd(rows);
        for (int r = 0; r < rows; ++r) {
            double mu = 0;
            for (int c = 0; c < cols; ++c) mu += x[static_cast<std::size_t>(r) * cols + c];
            mu /= cols;
            double var = 0;
            for (int c = 0; c < cols; ++c) {
                double d = x[static_cast<std::size_t>(r) * cols + c] - mu;
                var += d * d;
            }
            var /= cols;
            double rs = 1.0 / std::sqrt(var + eps);
            wmean[r] = mu;
            wrstd[r] = rs;
            for (int c = 0; c < cols; ++c) {
                std::size_t i = static_cast<std::size_t>(r) * cols + c;
                wy[i] = (x[i] - mu) * rs * gamma[c] + beta[c];
            }
        }
        check_all_close(y, wy);
        check_all_close(mean, wmean, 1e-5, 1e-5);
        check_all_close(rstd, wrstd, 1e-4, 1e-4);

        std::vector<float> dx(x.size()), dgamma(cols, 0.0f), dbeta(cols, 0.0f);
        k->layernorm_bwd(x.data(), gamma.data(), mean.data(), rstd.data(), dy.data(), dx.data(),
                         dgamma.data(), dbeta.data(), rows, cols);

        std::vector<double> wdx(x.size()), wdgamma(cols, 0.0), wdbeta(cols, 0.0);
        for (int r = 0; r < rows; ++r) {
            double mu = wmean[r], rs = wrstd[r];
            double s1 = 0, s2 = 0;
            for (int c = 0; c < cols; ++c) {
                std::size_t i = static_cast<std::size_t>(r) * cols + c;
                double xhat = (x[i] - mu) * rs;
                double dxhat = double(dy[i]) * gamma[c];
                s1 += dxhat;
                s2 += dxhat * xhat;
                wdgamma[c] += double(dy[i]) * xhat;
                wdbeta[c] += dy[i];
            }
            for (int c = 0; c < cols; ++c) {
                std::size_t i = static_cast<std::size_t>(r) * cols + c;
                double xhat = (x[i] - mu) * rs;
                double dxhat = double(dy[i]) * gamma[c];
                wdx[i] = rs * (dxhat - s1 / cols - xhat * s2 / cols);
            }
        }
        check_all_close(dx, wdx, 2e-4, 2e-4);
        check_all_close(dgamma, wdgamma, 1e-4, 1e-4);
        check_all_close(dbeta, wdbeta, 1e-5, 1e-5);
    }
}

TEST_CASE("softmax rows and its backward") {
    Rng rng(13);
    int rows = 5;
    for (int cols : {1, 3, 8, 19, 64}) {
        auto x0 = randn(rng, static_cast<std::size_t>(rows) * cols, 3.0f);
        for (const Kernels* k : backends()) {
            auto p = x0;
            k->softmax_rows(p.data(), rows, cols);
            for (int r = 0; r < rows; ++r) {
                double s = 0;
                for (int c = 0; c < cols; ++c) {
                    float v = p[static_cast<std::size_t>(r) * cols + c];
                    CHECK(v >= 0.0f);
                    CHECK(v <= 1.0f);
                    s += v;
                }
                CHECK(std::fabs(s - 1.0) < 1e-5);
            }
            std::vector<double> wp(x0.size());
            for (int r = 0; r < rows; ++r) {
                double mx = -1e300;
                for (int c = 0; c < cols; ++c)
                    mx = std::max(mx, double(x0[static_cast<std::size_t>(r) * cols + c]));
                double s = 0;
                for (int c = 0; c < cols; ++c) {
                    std::size_t i = static_cast<std::size_t>(r) * cols + c;
                    wp[i] = std::exp(double(x0[i]) - mx);
                    s += wp[i];
                }
                for (int c = 0; c < cols; ++c) wp[static_cast<std::size_t>(r) * cols + c] /= s;
            }
            check_all_close(p, wp, 1e-5, 1e-4);

            auto dp = randn(rng, x0.size());
            std::vector<float> dx(x0.size());
            k->softmax_bwd_rows(p.data(), dp.data(), dx.data(), rows, cols);
            std::vector<double> wdx(x0.size());
            for (int r = 0; r < rows; ++r) {
                double s = 0;
                for (int c = 0; c < cols; ++c) {
                    std::size_t i = static_cast<std::size_t>(r) * cols + c;
                    s += double(dp[i]) * p[i];
                }
                for (int c = 0; c < cols; ++c) {
                    std::size_t i = static_cast<std::size_t>(r) * cols + c;
                    wdx[i] = double(p[i]) * (double(dp[i]) - s);
                }
            }
            check_all_close(dx, wdx, 1e-5, 1e-4);
        }
    }
}

TEST_CASE("softmax handles mask magnitude inputs") {
    for (const Kernels* k : backends()) {
        std::vector<float> row = {2.0f, -1e9f, 1.0f, -1e9f};
        k->softmax_rows(row.data(), 1, 4);
        CHECK(row[1] == 0.0f);
        CHECK(row[3] == 0.0f);
        CHECK(row[0] + row[2] == doctest::Approx(1.0f));
        CHECK(row[0] == doctest::Approx(std::exp(1.0f) / (1.0f + std::exp(1.0f))));
    }
}

TEST_CASE("gelu matches erf form and finite differences") {
    for (const Kernels* k : backends()) {
        std::vector<float> x = {-3.0f, -1.0f, -0.5f, 0.0f, 0.5f, 1.0f, 3.0f};
        std::vector<float> y(x.size());
        k->gelu_fwd(x.data(), y.data(), static_cast<int>(x.size()));
        CHECK(y[3] == 0.0f);
        CHECK(y[5] == doctest::Approx(0.8413447461f).epsilon(1e-5));
        CHECK(y[1] == doctest::Approx(-0.15865525f).epsilon(1e-4));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(close(y[i], ref_gelu(x[i]), 1e-6, 1e-5));

        std::vector<float> dy(x.size(), 1.0f), dx(x.size());
        k->gelu_bwd(x.data(), dy.data(), dx.data(), static_cast<int>(x.size()));
        double h = 1e-6;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double fd = (ref_gelu(double(x[i]) + h) - ref_gelu(double(x[i]) - h)) / (2 * h);
            CHECK(close(dx[i], fd, 1e-4, 1e-4));
        }
    }
}

TEST_CASE("sigmoid is stable and accurate") {
    Rng rng(17);
    auto x = randn(rng, 100, 4.0f);
    x.push_back(100.0f);
    x.push_back(-100.0f);
    x.push_back(0.0f);
    for (const Kernels* k : backends()) {
        std::vector<float> y(x.size());
        k->sigmoid_vec(x.data(), y.data(), static_cast<int>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::isfinite(y[i]));
            CHECK(close(y[i], ref_sigmoid(x[i]), 1e-6, 1e-5));
        }
        CHECK(y[x.size() - 3] == doctest::Approx(1.0f).epsilon(1e-6));
        CHECK(y[x.size() - 2] == doctest::Approx(0.0f).epsilon(1e-6));
        CHECK(y[x.size() - 1] == 0.5f);
    }
}

TEST_CASE("bce with logits: value, gradient, stability") {
    for (const Kernels* k : backends()) {
        {
            std::vector<float> logits = {0.0f};
            std::vector<float> targets = {0.0f};
            std::vector<float> grad(1);
            float loss = k->bce_with_logits(logits.data(), targets.data(), grad.data(), 1);
            CHECK(loss == doctest::Approx(std::log(2.0f)));
            CHECK(grad[0] == doctest::Approx(0.5f));
        }
        {
            std::vector<float> logits = {100.0f, -100.0f, 100.0f, -100.0f};
            std::vector<float> targets = {1.0f, 0.0f, 0.0f, 1.0f};
            std::vector<float> grad(4);
            float loss = k->bce_with_logits(logits.data(), targets.data(), grad.data(), 4);
            CHECK(std::isfinite(loss));
            CHECK(loss == doctest::Approx(50.0f).epsilon(1e-4));
            for (float g : grad) CHECK(std::isfinite(g));
            CHECK(grad[2] == doctest::Approx(0.25f));
            CHECK(grad[3] == doctest::Approx(-0.25f));
        }
        {
            Rng rng(23);
            auto logits = randn(rng, 64, 2.0f);
            std::vector<float> targets(64);
            for (auto& t : targets) t = rng.bernoulli(0.3) ? 1.0f : 0.0f;
            std::vector<float> grad(64);
            float loss = k->bce_with_logits(logits.data(), targets.data(), grad.data(), 64);
            double wl = 0;
            for (int i = 0; i < 64; ++i) {
                double xv = logits[i], t = targets[i];
                wl += std::max(xv, 0.0) - xv * t + std::log1p(std::exp(-std::fabs(xv)));
                double g = (ref_sigmoid(xv) - t) / 64.0;
                CHECK(close(grad[i], g, 1e-6, 1e-5));
            }
            wl /= 64.0;
            CHECK(close(loss, wl, 1e-6, 1e-5));
        }
    }
}

TEST_CASE("adamw single step pinned") {
    for (const Kernels* k : backends()) {
        float w = 1.0f, m = 0.0f, v = 0.0f, g = 1.0f;
        float beta1 = 0.9f, beta2 = 0.999f;
        k->adamw_step(&w, &m, &v, &g, 1, 0.01f, beta1, beta2, 1e-8f, 0.01f, 1.0f - beta1,
                      1.0f - beta2);
        CHECK(m == doctest::Approx(0.1f));
        CHECK(v == doctest::Approx(0.001f));
        CHECK(w == doctest::Approx(0.98990000f).epsilon(1e-6));
    }
}

TEST_CASE("adamw trajectory matches a double precision simulation") {
    Rng rng(29);
    int n = 37;
    auto w0 = randn(rng, n);
    std::vector<std::vector<float>> grads;
    for (int t = 0; t < 5; ++t) grads.push_back(randn(rng, n));
    float lr = 0.003f, b1 = 0.9f, b2 = 0.999f, eps = 1e-8f, wd = 0.01f;

    for (const Kernels* k : backends()) {
        auto w = w0;
        std::vector<float> m(n, 0.0f), v(n, 0.0f);
        for (int t = 1; t <= 5; ++t) {
            float c1 = 1.0f - std::pow(b1, float(t));
            float c2 = 1.0f - std::pow(b2, float(t));
            k->adamw_step(w.data(), m.data(), v.data(), grads[t - 1].data(), n, lr, b1, b2, eps,
                          wd, c1, c2);
        }
        std::vector<double> ww(w0.begin(), w0.end()), mm(n, 0.0), vv(n, 0.0);
        for (int t = 1; t <= 5; ++t) {
            double c1 = 1.0 - std::pow(double(b1), t);
            double c2 = 1.0 - std::pow(double(b2), t);
            for (int i = 0; i < n; ++i) {
                double gi = grads[t - 1][i];
                mm[i] = b1 * mm[i] + (1.0 - b1) * gi;
                vv[i] = b2 * vv[i] + (1.0 - b2) * gi * gi;
                ww[i] -= lr * ((mm[i] / c1) / (std::sqrt(vv[i] / c2) + eps) + wd * ww[i]);
            }
        }
        check_all_close(w, ww, 1e-5, 1e-5);
    }
}

TEST_CASE("vector primitives") {
    Rng rng(31);
    int n = 53;
    auto x = randn(rng, n);
    auto y0 = randn(rng, n);
    for (const Kernels* k : backends()) {
        auto y = y0;
        k->axpy(n, 0.5f, x.data(), y.data());
        for (int i = 0; i < n; ++i) CHECK(close(y[i], double(y0[i]) + 0.5 * x[i], 1e-6, 1e-6));

        auto z = x;
        k->scale(n, -2.0f, z.data());
        for (int i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(-2.0f * x[i]));

        double wd = 0, ws = 0;
        for (int i = 0; i < n; ++i) {
            wd += double(x[i]) * y0[i];
            ws += x[i];
        }
        CHECK(close(k->dot(n, x.data(), y0.data()), wd, 1e-4, 1e-4));
        CHECK(close(k->vsum(n, x.data()), ws, 1e-4, 1e-4));
    }
}

TEST_CASE("scalar and avx2 backends agree") {
    if (!(cpu_has_avx2() && avx2_kernels_or_null())) return;
    const Kernels& s = scalar_kernels();
    const Kernels& a = avx2_kernels();
    Rng rng(37);
    int M = 24, N = 48, K = 56;
    auto A = randn(rng, static_cast<std::size_t>(M) * K);
    auto B = randn(rng, static_cast<std::size_t>(K) * N);
    std::vector<float> C1(static_cast<std::size_t>(M) * N), C2(C1.size());
    s.sgemm_nn(M, N, K, 1.0f, A.data(), B.data(), 0.0f, C1.data());
    a.sgemm_nn(M, N, K, 1.0f, A.data(), B.data(), 0.0f, C2.data());
    for (std::size_t i = 0; i < C1.size(); ++i) CHECK(close(C2[i], C1[i], 2e-5, 2e-5));

    auto xs = randn(rng, 1000, 2.0f);
    std::vector<float> y1(xs.size()), y2(xs.size());
    s.sigmoid_vec(xs.data(), y1.data(), static_cast<int>(xs.size()));
    a.sigmoid_vec(xs.data(), y2.data(), static_cast<int>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(close(y2[i], y1[i], 1e-6, 1e-5));

    auto sm1 = xs;
    auto sm2 = xs;
    s.softmax_rows(sm1.data(), 10, 100);
    a.softmax_rows(sm2.data(), 10, 100);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(close(sm2[i], sm1[i], 1e-6, 1e-4));
}

TEST_CASE("kernel runs are deterministic") {
    const Kernels& k = active_kernels();
    Rng rng(41);
    int M = 16, N = 32, K = 24;
    auto A = randn(rng, static_cast<std::size_t>(M) * K);
    auto B = randn(rng, static_cast<std::size_t>(K) * N);
    std::vector<float> C1(static_cast<std::size_t>(M) * N), C2(C1.size());
    k.sgemm_nn(M, N, K, 1.0f, A.data(), B.data(), 0.0f, C1.data());
    k.sgemm_nn(M, N, K, 1.0f, A.data(), B.data(), 0.0f, C2.data());
    CHECK(std::memcmp(C1.data(), C2.data(), C1.size() * sizeof(float)) == 0);
}

TEST_CASE("backend resolution rules") {
    bool avx2_built = avx2_kernels_or_null() != nullptr;
    CHECK(resolve_kernel_backend("", false) == "scalar");
    CHECK(resolve_kernel_backend("auto", false) == "scalar");
    CHECK(resolve_kernel_backend("scalar", true) == "scalar");
    if (avx2_built) {
        CHECK(resolve_kernel_backend("", true) == "avx2");
        CHECK(resolve_kernel_backend("avx2", true) == "avx2");
        try {
            resolve_kernel_backend("avx2", false);
            FAIL("unreachable");
        } catch (const Error& e) {
            CHECK(e.cls() == ErrorClass::environment);
        }
    }
    try {
        resolve_kernel_backend("sse9", true);
        FAIL("unreachable");
    } catch (const Error& e) {
        CHECK(e.cls() == ErrorClass::config);
    }
    CHECK(std::string(kernels_by_name("scalar").name) == "scalar");
    CHECK((kernel_backend_name() == "scalar" || kernel_backend_name() == "avx2"));
}
