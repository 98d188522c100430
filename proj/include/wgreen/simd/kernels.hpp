#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

namespace wgreen::simd {

/// Hot inner loops of the spectral contractions, as plain-array kernels.
/// Every kernel has a scalar reference implementation plus, where the
/// hardware allows, an AVX2 (x86-64) or NEON (aarch64) variant selected
/// once at startup. The variants are equivalence-tested against the
/// scalar reference; summation order differs, so agreement is up to
/// roundoff, not bit-exact.
struct KernelTable {
    /// sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i a[i]*b[i]*c[i]
    double (*dot3)(const double* a, const double* b, const double* c, std::size_t n);
    /// sum_i a[i]*b[i]*(wre[i] + I*wim[i]) -> (*re, *im)
    void (*cdot)(const double* a, const double* b, const double* wre, const double* wim,
                 std::size_t n, double* re, double* im);
    /// y[i] += alpha*x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// sum_i (re[i]^2 + im[i]^2) * w[i]
    double (*wsum_abs2)(const double* re, const double* im, const double* w, std::size_t n);
};

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Instruction sets usable on this machine (always includes scalar).
std::vector<Isa> available_isas();

/// The variant chosen at startup. Overridable with WGREEN_SIMD=scalar|avx2|neon
/// (falls back to scalar if the requested set is unavailable).
Isa active_isa();

/// Kernel table of the active variant.
const KernelTable& kernels();

/// Kernel table of a specific variant; throws std::invalid_argument if the
/// variant is not compiled in or not supported by the CPU.
const KernelTable& kernels(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) {
    return kernels().dot(a, b, n);
}

inline double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    return kernels().dot3(a, b, c, n);
}

inline std::complex<double> cdot(const double* a, const double* b, const double* wre,
                                 const double* wim, std::size_t n) {
    double re, im;
    kernels().cdot(a, b, wre, wim, n, &re, &im);
    return {re, im};
}

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    kernels().axpy(alpha, x, y, n);
}

inline double wsum_abs2(const double* re, const double* im, const double* w, std::size_t n) {
    return kernels().wsum_abs2(re, im, w, n);
}

} // namespace wgreen::simd
