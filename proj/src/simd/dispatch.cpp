#include <cstdlib>
#include <stdexcept>
#include <string>

#include "wgreen/simd/kernels.hpp"

namespace wgreen::simd {

const KernelTable& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels();
#endif

namespace {

bool isa_supported(Isa isa) {
    switch (isa) {
    case Isa::scalar:
        return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

Isa detect_isa() {
    if (const char* env = std::getenv("WGREEN_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
        if (want == "neon" && isa_supported(Isa::neon)) return Isa::neon;
        return Isa::scalar;
    }
    if (isa_supported(Isa::avx2)) return Isa::avx2;
    if (isa_supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
    if (isa_supported(Isa::avx2)) out.push_back(Isa::avx2);
    if (isa_supported(Isa::neon)) out.push_back(Isa::neon);
    return out;
}

Isa active_isa() {
    static const Isa isa = detect_isa();
    return isa;
}

const KernelTable& kernels(Isa isa) {
    if (!isa_supported(isa)) {
        throw std::invalid_argument("simd variant unavailable on this machine: " +
                                    std::string(isa_name(isa)));
    }
    switch (isa) {
    case Isa::scalar:
        return scalar_kernels();
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return avx2_kernels();
#else
        break;
#endif
    case Isa::neon:
#if defined(__aarch64__)
        return neon_kernels();
#else
        break;
#endif
    }
    return scalar_kernels();
}

const KernelTable& kernels() {
    static const KernelTable& table = kernels(active_isa());
    return table;
}

} // namespace wgreen::simd
