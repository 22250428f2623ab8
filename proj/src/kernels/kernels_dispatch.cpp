#include "newsent/kernels.hpp"

#include "newsent/util.hpp"

#include <cstdlib>

namespace newsent {

bool cpu_has_avx2() {
#if defined(__x86_64__) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels* avx2_kernels_or_null() {
#ifdef NEWSENT_HAVE_AVX2_TU
    return &avx2_kernels();
#else
    return nullptr;
#endif
}

std::string resolve_kernel_backend(const std::string& requested, bool has_avx2) {
    if (requested.empty() || requested == "auto")
        return (has_avx2 && avx2_kernels_or_null()) ? "avx2" : "scalar";
    if (requested == "scalar") return "scalar";
    if (requested == "avx2") {
        if (!avx2_kernels_or_null()) fail_env("avx2 kernels are not built into this binary");
        if (!has_avx2) fail_env("NEWSENT_KERNELS=avx2 requested but the cpu lacks avx2/fma");
        return "avx2";
    }
    fail_config("unknown kernel backend '" + requested + "' (expected scalar, avx2 or auto)");
}

const Kernels& kernels_by_name(const std::string& name) {
    if (name == "scalar") return scalar_kernels();
    if (name == "avx2") {
        const Kernels* k = avx2_kernels_or_null();
        if (!k) fail_env("avx2 kernels are not built into this binary");
        return *k;
    }
    fail_config("unknown kernel backend '" + name + "'");
}

const Kernels& active_kernels() {
    static const Kernels& k = []() -> const Kernels& {
        const char* env = std::getenv("NEWSENT_KERNELS");
        std::string requested = env ? env : "";
        return kernels_by_name(resolve_kernel_backend(requested, cpu_has_avx2()));
    }();
    return k;
}

std::string kernel_backend_name() { return active_kernels().name; }

} // namespace newsent
