#pragma once

#include <cstdint>
#include <random>

namespace bayesfault {

/// Mixes a parent seed and a stream id into an independent child seed
/// (SplitMix64 finalizer). Used to give every trial / resample / operation
/// its own generator so results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded 64-bit generator with the handful of draws the library needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound).
    std::uint64_t index(std::uint64_t bound);

    /// Child generator for sub-stream `stream`; does not advance this one.
    Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }
    std::uint64_t seed() const noexcept { return seed_; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace bayesfault
