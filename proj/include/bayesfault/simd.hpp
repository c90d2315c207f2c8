#pragma once

// Data-parallel inner loops used by the likelihood, Monte Carlo and fitting
// code. Every kernel has a scalar reference implementation; vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64) are selected once at
// runtime. Set BAYESFAULT_SIMD=scalar|avx2|neon to force a level.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace bayesfault::simd {

enum class Level { Scalar, Avx2, Neon };

std::string_view to_string(Level level) noexcept;

struct KernelTable {
    Level level;
    double (*dot)(const double* a, const double* b, std::size_t len);
    double (*sum_squares)(const double* a, std::size_t len);
    /// sum_i (a_i - b_i)^2
    double (*squared_distance)(const double* a, const double* b, std::size_t len);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t len);
    /// y = A x with A row-major (rows x cols)
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled for this target.
const KernelTable* avx2_kernels() noexcept;
const KernelTable* neon_kernels() noexcept;

/// Best level the running CPU supports.
Level detect_level() noexcept;
bool level_supported(Level level) noexcept;

/// Kernels currently in use.
const KernelTable& active() noexcept;
Level active_level() noexcept;
/// Throws InvalidInput when `level` is not supported on this machine.
void set_level(Level level);

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
    return active().sum_squares(a.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> y) {
    assert(a.size() == rows * cols && x.size() == cols && y.size() == rows);
    active().gemv(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace bayesfault::simd
