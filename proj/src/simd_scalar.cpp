#include "bayesfault/simd.hpp"

namespace bayesfault::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_scalar(const double* a, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += a[i] * a[i];
    return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t len) {
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

constexpr KernelTable kScalar{Level::Scalar,        dot_scalar,  sum_squares_scalar,
                              squared_distance_scalar, axpy_scalar, gemv_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace bayesfault::simd
