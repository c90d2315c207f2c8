#include "bayesfault/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace bayesfault::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t len) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < len; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_neon(const double* a, std::size_t len) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const float64x2_t v0 = vld1q_f64(a + i);
        const float64x2_t v1 = vld1q_f64(a + i + 2);
        acc0 = vfmaq_f64(acc0, v0, v0);
        acc1 = vfmaq_f64(acc1, v1, v1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < len; ++i) acc += a[i] * a[i];
    return acc;
}

double squared_distance_neon(const double* a, const double* b, std::size_t len) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < len; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t len) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= len; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < len; ++i) y[i] += alpha * x[i];
}

void gemv_neon(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(a + r * cols, x, cols);
}

constexpr KernelTable kNeon{Level::Neon,        dot_neon,  sum_squares_neon,
                            squared_distance_neon, axpy_neon, gemv_neon};

}  // namespace

const KernelTable* neon_kernels() noexcept { return &kNeon; }

}  // namespace bayesfault::simd

#else

namespace bayesfault::simd {
const KernelTable* neon_kernels() noexcept { return nullptr; }
}  // namespace bayesfault::simd

#endif
