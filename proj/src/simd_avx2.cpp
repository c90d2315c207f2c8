#include "bayesfault/simd.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace bayesfault::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double* a, const double* b, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= len) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_avx2(const double* a, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(a + i);
        const __m256d v1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    if (i + 4 <= len) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) acc += a[i] * a[i];
    return acc;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t len) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    if (i + 4 <= len) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
        i += 4;
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t len) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < len; ++i) y[i] += alpha * x[i];
}

// Four rows share each load of x.
void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    std::size_t r = 0;
    for (; r + 4 <= rows; r += 4) {
        const double* r0 = a + r * cols;
        const double* r1 = r0 + cols;
        const double* r2 = r1 + cols;
        const double* r3 = r2 + cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        __m256d acc2 = _mm256_setzero_pd();
        __m256d acc3 = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            const __m256d vx = _mm256_loadu_pd(x + c);
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + c), vx, acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + c), vx, acc1);
            acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + c), vx, acc2);
            acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + c), vx, acc3);
        }
        double s0 = hsum(acc0), s1 = hsum(acc1), s2 = hsum(acc2), s3 = hsum(acc3);
        for (; c < cols; ++c) {
            s0 += r0[c] * x[c];
            s1 += r1[c] * x[c];
            s2 += r2[c] * x[c];
            s3 += r3[c] * x[c];
        }
        y[r] = s0;
        y[r + 1] = s1;
        y[r + 2] = s2;
        y[r + 3] = s3;
    }
    for (; r < rows; ++r) y[r] = dot_avx2(a + r * cols, x, cols);
}

constexpr KernelTable kAvx2{Level::Avx2,        dot_avx2,  sum_squares_avx2,
                            squared_distance_avx2, axpy_avx2, gemv_avx2};

}  // namespace

const KernelTable* avx2_kernels() noexcept { return &kAvx2; }

}  // namespace bayesfault::simd

#else

namespace bayesfault::simd {
const KernelTable* avx2_kernels() noexcept { return nullptr; }
}  // namespace bayesfault::simd

#endif
