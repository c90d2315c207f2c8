#include <atomic>
#include <cstdlib>
#include <string>

#include "bayesfault/errors.hpp"
#include "bayesfault/simd.hpp"

namespace bayesfault::simd {
namespace {

const KernelTable* table_for(Level level) noexcept {
    switch (level) {
        case Level::Scalar: return &scalar_kernels();
        case Level::Avx2: return avx2_kernels();
        case Level::Neon: return neon_kernels();
    }
    return nullptr;
}

const KernelTable* initial_table() noexcept {
    Level level = detect_level();
    if (const char* env = std::getenv("BAYESFAULT_SIMD")) {
        const std::string want(env);
        if (want == "scalar") level = Level::Scalar;
        else if (want == "avx2" && level_supported(Level::Avx2)) level = Level::Avx2;
        else if (want == "neon" && level_supported(Level::Neon)) level = Level::Neon;
    }
    return table_for(level);
}

std::atomic<const KernelTable*>& current() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
    switch (level) {
        case Level::Scalar: return "scalar";
        case Level::Avx2: return "avx2";
        case Level::Neon: return "neon";
    }
    return "unknown";
}

bool level_supported(Level level) noexcept {
    switch (level) {
        case Level::Scalar: return true;
        case Level::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
            return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
                   __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Level::Neon: return neon_kernels() != nullptr;
    }
    return false;
}

Level detect_level() noexcept {
    if (level_supported(Level::Avx2)) return Level::Avx2;
    if (level_supported(Level::Neon)) return Level::Neon;
    return Level::Scalar;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Level active_level() noexcept { return active().level; }

void set_level(Level level) {
    if (!level_supported(level)) {
        throw InvalidInput("SIMD level '" + std::string(to_string(level)) +
                           "' is not supported on this machine");
    }
    current().store(table_for(level), std::memory_order_release);
}

}  // namespace bayesfault::simd
