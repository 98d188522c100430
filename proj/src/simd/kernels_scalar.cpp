// Scalar reference kernels. These define the semantics the vector
// variants are tested against.

#include "wgreen/simd/kernels.hpp"

namespace wgreen::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot3_scalar(const double* a, const double* b, const double* c, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i] * c[i];
    return acc;
}

void cdot_scalar(const double* a, const double* b, const double* wre, const double* wim,
                 std::size_t n, double* re, double* im) {
    double sre = 0.0, sim = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ab = a[i] * b[i];
        sre += ab * wre[i];
        sim += ab * wim[i];
    }
    *re = sre;
    *im = sim;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double wsum_abs2_scalar(const double* re, const double* im, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (re[i] * re[i] + im[i] * im[i]) * w[i];
    return acc;
}

} // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{dot_scalar, dot3_scalar, cdot_scalar, axpy_scalar,
                                   wsum_abs2_scalar};
    return table;
}

} // namespace wgreen::simd
