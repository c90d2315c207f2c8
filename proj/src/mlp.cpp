#include "bayesfault/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bayesfault/errors.hpp"
#include "bayesfault/random.hpp"

namespace bayesfault {
namespace {

constexpr double kAbsoluteAgreement = 1e-8;

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void check_input(const MlpModel& model, std::size_t len) {
    if (len != model.input_dim()) {
        throw InvalidInput("MLP expects inputs of length " + std::to_string(model.input_dim()) + ", got " +
                           std::to_string(len));
    }
}

void check_dataset(const MlpModel& model, const Dataset& data) {
    check_input(model, data.feature_dim());
    if (data.output_dim() != model.output_dim()) {
        throw InvalidInput("MLP has " + std::to_string(model.output_dim()) + " outputs but dataset has " +
                           std::to_string(data.output_dim()));
    }
}

// Visits every parameter of a model or gradient in a fixed order.
template <typename Model, typename Fn>
void for_each_parameter(Model& m, Fn&& fn) {
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) fn(m.w1.data()[i]);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) fn(m.b1.data()[i]);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) fn(m.w2.data()[i]);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) fn(m.b2.data()[i]);
}

double sample_loss(const MlpModel& model, const SamplePair& sample) {
    const Vector y = mlp_predict(model, {sample.s.data(), static_cast<std::size_t>(sample.s.size())});
    return (y - sample.x).squaredNorm() / static_cast<double>(y.size());
}

// Batch gradient of the mean per-sample loss; `s` is p x B, `x` is n x B.
MlpGradient batch_gradient(const MlpModel& model, const Matrix& s, const Matrix& x) {
    const double batch = static_cast<double>(s.cols());
    const Matrix hidden = sigmoid((model.w1 * s).colwise() + model.b1);
    const Matrix out = (model.w2 * hidden).colwise() + model.b2;
    const Matrix err = (out - x) * (2.0 / (static_cast<double>(x.rows()) * batch));
    const Matrix dhidden = ((model.w2.transpose() * err).array() * hidden.array() * (1.0 - hidden.array())).matrix();
    MlpGradient g;
    g.w2 = err * hidden.transpose();
    g.b2 = err.rowwise().sum();
    g.w1 = dhidden * s.transpose();
    g.b1 = dhidden.rowwise().sum();
    return g;
}

}  // namespace

void MlpModel::validate() const {
    const auto p = w1.cols();
    const auto h = w1.rows();
    if (p == 0 || h != 2 * p) throw InvalidInput("MLP hidden layer must be twice the input dimension");
    if (b1.size() != h || w2.cols() != h || b2.size() != w2.rows() || w2.rows() == 0) {
        throw InvalidInput("MLP parameter shapes are inconsistent");
    }
    if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
        throw InvalidInput("MLP has non-finite parameters");
    }
}

MlpModel mlp_zero(std::size_t input_dim, std::size_t output_dim) {
    if (input_dim == 0 || output_dim == 0) throw InvalidInput("MLP dimensions must be positive");
    const auto p = static_cast<Eigen::Index>(input_dim);
    const auto n = static_cast<Eigen::Index>(output_dim);
    MlpModel m;
    m.w1 = Matrix::Zero(2 * p, p);
    m.b1 = Vector::Zero(2 * p);
    m.w2 = Matrix::Zero(n, 2 * p);
    m.b2 = Vector::Zero(n);
    return m;
}

MlpModel mlp_init(std::size_t input_dim, std::size_t output_dim, std::uint64_t seed) {
    MlpModel m = mlp_zero(input_dim, output_dim);
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(2 * input_dim));
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-r1, r1);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1.data()[i] = rng.uniform(-r1, r1);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = rng.uniform(-r2, r2);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2.data()[i] = rng.uniform(-r2, r2);
    m.seed = seed;
    return m;
}

Vector mlp_predict(const MlpModel& model, std::span<const double> s) {
    check_input(model, s.size());
    const Eigen::Map<const Vector> input(s.data(), static_cast<Eigen::Index>(s.size()));
    const Vector hidden = sigmoid(model.w1 * input + model.b1);
    return model.w2 * hidden + model.b2;
}

double mlp_loss(const MlpModel& model, const Dataset& data) {
    check_dataset(model, data);
    if (data.empty()) throw InvalidInput("MLP loss of an empty dataset is undefined");
    const Matrix hidden = sigmoid((model.w1 * data.features()).colwise() + model.b1);
    const Matrix out = (model.w2 * hidden).colwise() + model.b2;
    return (out - data.outputs()).squaredNorm() / static_cast<double>(data.output_dim() * data.size());
}

MlpGradient mlp_gradient(const MlpModel& model, const SamplePair& sample) {
    check_input(model, static_cast<std::size_t>(sample.s.size()));
    if (static_cast<std::size_t>(sample.x.size()) != model.output_dim()) {
        throw InvalidInput("sample output length does not match the MLP");
    }
    return batch_gradient(model, sample.s, sample.x);
}

MlpModel mlp_fit(const Dataset& data, const MlpModel& init, const MlpFitOptions& options) {
    init.validate();
    check_dataset(init, data);
    if (!(options.learn_rate > 0.0) || !std::isfinite(options.learn_rate)) {
        throw InvalidInput("MLP learn rate must be finite and > 0");
    }
    if (options.batch == 0) throw InvalidInput("MLP batch size must be >= 1");
    if (options.epochs == 0) return init;
    if (data.empty()) throw InvalidInput("MLP training needs at least one sample");

    MlpModel model = init;
    const std::size_t count = data.size();
    const std::size_t p = data.feature_dim();
    const std::size_t n = data.output_dim();
    std::vector<std::size_t> order(count);
    Matrix s_batch;
    Matrix x_batch;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(options.seed, epoch + 1);
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t begin = 0; begin < count; begin += options.batch) {
            const std::size_t size = std::min(options.batch, count - begin);
            s_batch.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(size));
            x_batch.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(size));
            for (std::size_t j = 0; j < size; ++j) {
                const auto col = static_cast<Eigen::Index>(order[begin + j]);
                s_batch.col(static_cast<Eigen::Index>(j)) = data.features().col(col);
                x_batch.col(static_cast<Eigen::Index>(j)) = data.outputs().col(col);
            }
            const MlpGradient g = batch_gradient(model, s_batch, x_batch);
            model.w1 -= options.learn_rate * g.w1;
            model.b1 -= options.learn_rate * g.b1;
            model.w2 -= options.learn_rate * g.w2;
            model.b2 -= options.learn_rate * g.b2;
        }
        const double loss = mlp_loss(model, data);
        if (!std::isfinite(loss)) {
            throw NumericalFailure("MLP training loss became non-finite at epoch " + std::to_string(epoch));
        }
        model.final_loss = loss;
    }
    model.epochs_trained = init.epochs_trained + options.epochs;
    model.seed = options.seed;
    return model;
}

double mlp_gradient_check(const MlpModel& model, const SamplePair& sample, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-2) throw InvalidInput("gradient check epsilon must lie in (0, 1e-2]");
    const MlpGradient analytic = mlp_gradient(model, sample);

    std::vector<double> backprop;
    backprop.reserve(model.parameter_count());
    for_each_parameter(analytic, [&](const double& g) { backprop.push_back(g); });

    MlpModel probe = model;
    std::size_t index = 0;
    double worst = 0.0;
    for_each_parameter(probe, [&](double& param) {
        const double saved = param;
        param = saved + epsilon;
        const double up = sample_loss(probe, sample);
        param = saved - epsilon;
        const double down = sample_loss(probe, sample);
        param = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double exact = backprop[index++];
        const double diff = std::abs(numeric - exact);
        if (diff > kAbsoluteAgreement) {
            worst = std::max(worst, diff / std::max(std::abs(numeric), std::abs(exact)));
        }
    });
    return worst;
}

}  // namespace bayesfault
