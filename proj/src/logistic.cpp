#include <cmath>
#include <string>

#include "bayesfault/bayes.hpp"
#include "bayesfault/errors.hpp"

namespace bayesfault {
namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_training_input(std::span<const ClassifierFeatures> features, std::span<const Label> labels) {
    if (features.empty()) throw InvalidInput("logistic regression needs at least one example");
    if (features.size() != labels.size()) {
        throw InvalidInput("logistic regression got " + std::to_string(features.size()) + " feature rows but " +
                           std::to_string(labels.size()) + " labels");
    }
}

}  // namespace

LogisticLoss logistic_loss(std::span<const ClassifierFeatures> features, std::span<const Label> labels,
                           const std::array<double, 3>& weights, double bias) {
    check_training_input(features, labels);
    LogisticLoss out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto f = features[i].as_array();
        const double z = weights[0] * f[0] + weights[1] * f[1] + weights[2] * f[2] + bias;
        const double y = labels[i] == Label::Fault ? 1.0 : 0.0;
        // -[y log sig(z) + (1-y) log(1 - sig(z))] = softplus(z) - y z
        out.loss += softplus(z) - y * z;
        const double residual = sigmoid(z) - y;
        for (std::size_t j = 0; j < 3; ++j) out.grad_weights[j] += residual * f[j];
        out.grad_bias += residual;
    }
    const double scale = 1.0 / static_cast<double>(features.size());
    out.loss *= scale;
    for (double& g : out.grad_weights) g *= scale;
    out.grad_bias *= scale;
    return out;
}

LogisticModel train_logistic(std::span<const ClassifierFeatures> features, std::span<const Label> labels,
                             double learn_rate, std::size_t epochs, std::uint64_t seed) {
    check_training_input(features, labels);
    if (!(learn_rate > 0.0) || !std::isfinite(learn_rate)) throw InvalidInput("learn rate must be finite and > 0");

    const double count = static_cast<double>(features.size());
    std::array<double, 3> mean{};
    std::array<double, 3> scale{};
    for (const auto& f : features) {
        const auto v = f.as_array();
        for (std::size_t j = 0; j < 3; ++j) mean[j] += v[j];
    }
    for (double& m : mean) m /= count;
    for (const auto& f : features) {
        const auto v = f.as_array();
        for (std::size_t j = 0; j < 3; ++j) scale[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
    }
    for (double& s : scale) {
        s = std::sqrt(s / count);
        if (!(s > 1e-12)) s = 1.0;  // constant feature: center only
    }

    std::vector<ClassifierFeatures> standardized(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto v = features[i].as_array();
        standardized[i] = {(v[0] - mean[0]) / scale[0], (v[1] - mean[1]) / scale[1], (v[2] - mean[2]) / scale[2]};
    }

    std::array<double, 3> w{};
    double b = 0.0;
    LogisticModel model;
    model.seed = seed;
    double loss = std::log(2.0);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const LogisticLoss step = logistic_loss(standardized, labels, w, b);
        loss = step.loss;
        if (!std::isfinite(loss)) {
            throw NumericalFailure("logistic regression diverged at epoch " + std::to_string(epoch));
        }
        for (std::size_t j = 0; j < 3; ++j) w[j] -= learn_rate * step.grad_weights[j];
        b -= learn_rate * step.grad_bias;
    }
    if (epochs > 0) {
        loss = logistic_loss(standardized, labels, w, b).loss;
        if (!std::isfinite(loss)) throw NumericalFailure("logistic regression diverged");
    }

    // Fold standardization back: w'(f - mu)/sigma + b = (w/sigma)' f + (b - sum w mu / sigma)
    for (std::size_t j = 0; j < 3; ++j) {
        model.weights[j] = w[j] / scale[j];
        b -= w[j] * mean[j] / scale[j];
    }
    model.bias = epochs > 0 ? b : 0.0;
    if (epochs == 0) model.weights = {};
    model.iterations = epochs;
    model.final_loss = loss;
    return model;
}

LogisticPrediction predict_logistic(const LogisticModel& model, const ClassifierFeatures& features) {
    const auto f = features.as_array();
    const double z = model.weights[0] * f[0] + model.weights[1] * f[1] + model.weights[2] * f[2] + model.bias;
    LogisticPrediction out;
    out.probability = sigmoid(z);
    out.label = out.probability > 0.5 ? Label::Fault : Label::Normal;
    return out;
}

}  // namespace bayesfault
