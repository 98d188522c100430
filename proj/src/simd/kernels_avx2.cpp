// AVX2+FMA kernels, 4 doubles per lane. This translation unit is compiled
// with -mavx2 -mfma; the dispatcher only installs it after a cpuid check.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "wgreen/simd/kernels.hpp"

namespace wgreen::simd {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

double dot3_avx2(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += a[i] * b[i] * c[i];
    return sum;
}

void cdot_avx2(const double* a, const double* b, const double* wre, const double* wim,
               std::size_t n, double* re, double* im) {
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc_re = _mm256_fmadd_pd(ab, _mm256_loadu_pd(wre + i), acc_re);
        acc_im = _mm256_fmadd_pd(ab, _mm256_loadu_pd(wim + i), acc_im);
    }
    double sre = hsum(acc_re);
    double sim = hsum(acc_im);
    for (; i < n; ++i) {
        const double ab = a[i] * b[i];
        sre += ab * wre[i];
        sim += ab * wim[i];
    }
    *re = sre;
    *im = sim;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double wsum_abs2_avx2(const double* re, const double* im, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vr = _mm256_loadu_pd(re + i);
        __m256d vi = _mm256_loadu_pd(im + i);
        __m256d mag = _mm256_fmadd_pd(vi, vi, _mm256_mul_pd(vr, vr));
        acc = _mm256_fmadd_pd(mag, _mm256_loadu_pd(w + i), acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += (re[i] * re[i] + im[i] * im[i]) * w[i];
    return sum;
}

} // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{dot_avx2, dot3_avx2, cdot_avx2, axpy_avx2, wsum_abs2_avx2};
    return table;
}

} // namespace wgreen::simd

#endif // x86-64
