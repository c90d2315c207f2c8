#include "bayesfault/random.hpp"

namespace bayesfault {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), engine_(derive_seed(seed, stream)) {}

std::uint64_t Rng::index(std::uint64_t bound) {
    std::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
    return dist(engine_);
}

}  // namespace bayesfault
