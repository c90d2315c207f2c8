#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "bayesfault/kernel_model.hpp"

namespace bayesfault {

/// One-hidden-layer regressor  y = W2 sigmoid(W1 s + b1) + b2  with hidden
/// width 2p. Used as the non-linear comparison for model transfer; transfer
/// happens by warm-starting SGD from a source-building model.
struct MlpModel {
    Matrix w1;  ///< 2p x p
    Vector b1;  ///< 2p
    Matrix w2;  ///< n x 2p
    Vector b2;  ///< n

    std::size_t epochs_trained = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;

    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }
    std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(w1.rows()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(w2.rows()); }
    std::size_t parameter_count() const noexcept {
        return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
    }

    /// Throws InvalidInput on inconsistent shapes or non-finite parameters.
    void validate() const;
};

/// All parameters zero.
MlpModel mlp_zero(std::size_t input_dim, std::size_t output_dim);

/// Uniform in +-1/sqrt(fan_in) per layer.
MlpModel mlp_init(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed);

Vector mlp_predict(const MlpModel& model, std::span<const double> s);

/// Mean over samples of the per-sample squared error averaged over outputs.
double mlp_loss(const MlpModel& model, const Dataset& data);

/// Gradient of the single-sample loss (1/n)||y(s) - x||^2, shaped like the model.
struct MlpGradient {
    Matrix w1;
    Vector b1;
    Matrix w2;
    Vector b2;
};

MlpGradient mlp_gradient(const MlpModel& model, const SamplePair& sample);

struct MlpFitOptions {
    double learn_rate = 0.05;
    std::size_t epochs = 100;
    std::size_t batch = 32;
    std::uint64_t seed = 0;
};

/// Mini-batch SGD from `init`. The sample order of each epoch is a seeded
/// shuffle; epochs = 0 returns `init` unchanged. Throws NumericalFailure when
/// the loss stops being finite.
MlpModel mlp_fit(const Dataset& data, const MlpModel& init, const MlpFitOptions& options);

/// Largest relative disagreement between backprop and central differences over
/// every parameter. Entries that agree to 1e-8 absolute count as exact.
double mlp_gradient_check(const MlpModel& model, const SamplePair& sample, double epsilon);

}  // namespace bayesfault
