#pragma once

// Log-likelihood-ratio fault test for x = A s + eps.
//
// Normal hypothesis:  x ~ N(A s, I).
// Fault hypothesis:   x = B s + eps with B ~ MatrixNormal(A, I, I), which
// marginalizes to x ~ N(A s, (1 + s's) I).
//
// The fault likelihood is evaluated through the completed-square form
//   C = s s' + I,  D = x s' + A,
//   log P = -(n/2) log 2pi - 1/2 Tr[x x' + A A' - (D C^-1)' D] + (n/2) log|C^-1|
// with C^-1 and |C| from the rank-one identities; the plain Gaussian marginal
// is kept alongside as a cross-check.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bayesfault/kernel_model.hpp"

namespace bayesfault {

enum class Label : int { Normal = 0, Fault = 1 };

/// Separated terms of the single-sample classifier. Sums of features over a
/// window are the features of the window.
struct ClassifierFeatures {
    double residual_trace = 0.0;  ///< Tr[(x - As)'(x - As)]
    double cross_trace = 0.0;     ///< Tr[x x' + A A' - (D C^-1)' D]
    double logdet_term = 0.0;     ///< log|C^-1|, always <= 0

    ClassifierFeatures& operator+=(const ClassifierFeatures& other) noexcept {
        residual_trace += other.residual_trace;
        cross_trace += other.cross_trace;
        logdet_term += other.logdet_term;
        return *this;
    }
    std::array<double, 3> as_array() const noexcept { return {residual_trace, cross_trace, logdet_term}; }
};

struct LogLikRatio {
    double value = 0.0;  ///< log P(x | A, s) - log P(x | fault, s)
    Label decision = Label::Normal;
};

/// Sign rule; a ratio of exactly zero is normal.
constexpr Label decide(double value) noexcept { return value >= 0.0 ? Label::Normal : Label::Fault; }

double loglik_normal(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a);

/// Completed-square (trace / logdet) evaluation of the fault marginal.
double loglik_fault(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a);

/// Same quantity as log N(x; A s, (1 + s's) I), evaluated directly.
double loglik_fault_marginal(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;  ///< delta-method standard error of the log estimate
};

/// Monte Carlo integration of the fault likelihood: draws B ~ MatrixNormal(A, I, I)
/// explicitly and averages N(x; B s, I). Requires draws >= 1000.
McEstimate mc_posterior_oracle(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a,
                               std::size_t draws, std::uint64_t seed);

LogLikRatio classify_single(std::span<const double> s, std::span<const double> x, const TransitionMatrix& a);

/// Additive ratio over every pair in the dataset. Throws on an empty dataset.
LogLikRatio classify_sequence(const Dataset& data, const TransitionMatrix& a);

/// Non-overlapping windows of `window` consecutive pairs; a trailing partial
/// window is dropped.
std::vector<LogLikRatio> classify_windows(const Dataset& data, const TransitionMatrix& a, std::size_t window);

ClassifierFeatures extract_features(std::span<const double> s, std::span<const double> x, const TransitionMatrix& a);

/// Per-window feature sums, same windowing as classify_windows.
std::vector<ClassifierFeatures> window_features(const Dataset& data, const TransitionMatrix& a, std::size_t window);

/// Recombination of the separated terms into the two log-likelihoods.
/// `samples` is the number of pairs the features were summed over.
double loglik_normal_from_features(const ClassifierFeatures& f, std::size_t n, std::size_t samples = 1);
double loglik_fault_from_features(const ClassifierFeatures& f, std::size_t n, std::size_t samples = 1);

/// (I + s s')^-1 by Sherman-Morrison.
Matrix rank_one_inverse(std::span<const double> s);
/// log|I + s s'| by the matrix determinant lemma.
double rank_one_logdet(std::span<const double> s);

// ---------------------------------------------------------------------------
// Logistic layer over ClassifierFeatures.

struct LogisticModel {
    std::array<double, 3> weights{};
    double bias = 0.0;
    std::size_t iterations = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
};

struct LogisticPrediction {
    double probability = 0.5;
    Label label = Label::Normal;
};

struct LogisticLoss {
    double loss = 0.0;
    std::array<double, 3> grad_weights{};
    double grad_bias = 0.0;
};

/// Mean cross-entropy and its gradient with respect to (weights, bias).
LogisticLoss logistic_loss(std::span<const ClassifierFeatures> features, std::span<const Label> labels,
                           const std::array<double, 3>& weights, double bias);

/// Full-batch gradient descent from zero. Features are z-scored with training
/// statistics during optimization and the scaling is folded back into the
/// returned weights, so the model applies to raw features.
LogisticModel train_logistic(std::span<const ClassifierFeatures> features, std::span<const Label> labels,
                             double learn_rate, std::size_t epochs, std::uint64_t seed);

LogisticPrediction predict_logistic(const LogisticModel& model, const ClassifierFeatures& features);

}  // namespace bayesfault
