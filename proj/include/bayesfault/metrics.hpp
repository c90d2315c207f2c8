#pragma once

#include <cstddef>
#include <span>

#include "bayesfault/bayes.hpp"

namespace bayesfault {

/// Binary confusion counts with fault as the positive class.
struct Confusion {
    std::size_t true_positive = 0;
    std::size_t false_positive = 0;
    std::size_t true_negative = 0;
    std::size_t false_negative = 0;

    void add(Label truth, Label predicted) noexcept;
    std::size_t total() const noexcept {
        return true_positive + false_positive + true_negative + false_negative;
    }

    // Empty denominators give 0 rather than NaN.
    double precision() const noexcept;
    double recall() const noexcept;
    double f1() const noexcept;
    double accuracy() const noexcept;
};

Confusion confusion(std::span<const Label> truth, std::span<const Label> predicted);

}  // namespace bayesfault
