// NEON kernels, 2 doubles per lane. NEON is baseline on aarch64 so no
// feature probe is needed beyond the architecture check.

#if defined(__aarch64__)

#include <arm_neon.h>

#include "wgreen/simd/kernels.hpp"

namespace wgreen::simd {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double dot3_neon(const double* a, const double* b, const double* c, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, ab, vld1q_f64(c + i));
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += a[i] * b[i] * c[i];
    return sum;
}

void cdot_neon(const double* a, const double* b, const double* wre, const double* wim,
               std::size_t n, double* re, double* im) {
    float64x2_t acc_re = vdupq_n_f64(0.0);
    float64x2_t acc_im = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc_re = vfmaq_f64(acc_re, ab, vld1q_f64(wre + i));
        acc_im = vfmaq_f64(acc_im, ab, vld1q_f64(wim + i));
    }
    double sre = vaddvq_f64(acc_re);
    double sim = vaddvq_f64(acc_im);
    for (; i < n; ++i) {
        const double ab = a[i] * b[i];
        sre += ab * wre[i];
        sim += ab * wim[i];
    }
    *re = sre;
    *im = sim;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double wsum_abs2_neon(const double* re, const double* im, const double* w, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vr = vld1q_f64(re + i);
        float64x2_t vi = vld1q_f64(im + i);
        float64x2_t mag = vfmaq_f64(vmulq_f64(vr, vr), vi, vi);
        acc = vfmaq_f64(acc, mag, vld1q_f64(w + i));
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) sum += (re[i] * re[i] + im[i] * im[i]) * w[i];
    return sum;
}

} // namespace

const KernelTable& neon_kernels() {
    static const KernelTable table{dot_neon, dot3_neon, cdot_neon, axpy_neon, wsum_abs2_neon};
    return table;
}

} // namespace wgreen::simd

#endif // aarch64
