#include "bayesfault/kernel_model.hpp"

#include <cmath>
#include <string>

#include "bayesfault/errors.hpp"
#include "bayesfault/random.hpp"
#include "bayesfault/simd.hpp"

namespace bayesfault {
namespace {

std::string dims(std::size_t rows, std::size_t cols) {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool all_finite(const double* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        if (!std::isfinite(data[i])) return false;
    }
    return true;
}

}  // namespace

KernelConfig KernelConfig::make(std::size_t n, std::size_t k, std::size_t d) {
    if (n == 0) throw InvalidInput("kernel config needs at least one dependent variable (n >= 1)");
    if (d == 0) throw InvalidInput("polynomial degree must be >= 1");
    return KernelConfig{n, k, d};
}

std::vector<std::string> KernelConfig::feature_names() const {
    std::vector<std::string> names;
    names.reserve(p());
    for (std::size_t power = d; power >= 1; --power) {
        for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i) + "^" + std::to_string(power));
    }
    for (std::size_t power = d; power >= 1; --power) {
        for (std::size_t i = 0; i < k; ++i) names.push_back("u" + std::to_string(i) + "^" + std::to_string(power));
    }
    names.emplace_back("const");
    return names;
}

TransitionMatrix::TransitionMatrix(RowMatrix entries, std::optional<KernelConfig> config)
    : entries_(std::move(entries)), config_(config) {
    if (config_) {
        if (rows() != config_->n || cols() != config_->p()) {
            throw InvalidInput("transition matrix is " + dims(rows(), cols()) + " but kernel config requires " +
                               dims(config_->n, config_->p()));
        }
    }
    if (rows() == 0 || cols() == 0) throw InvalidInput("transition matrix must be non-empty");
    if (!all_finite(entries_.data(), static_cast<std::size_t>(entries_.size()))) {
        throw InvalidInput("transition matrix has non-finite entries");
    }
}

TransitionMatrix TransitionMatrix::zeros(const KernelConfig& config) {
    return TransitionMatrix(RowMatrix::Zero(static_cast<Eigen::Index>(config.n), static_cast<Eigen::Index>(config.p())),
                            config);
}

void TransitionMatrix::apply(std::span<const double> s, std::span<double> out) const {
    if (s.size() != cols() || out.size() != rows()) {
        throw InvalidInput("cannot apply " + dims(rows(), cols()) + " matrix to a length-" + std::to_string(s.size()) +
                           " feature vector");
    }
    simd::gemv(data(), rows(), cols(), s, out);
}

Vector TransitionMatrix::apply(std::span<const double> s) const {
    Vector out(static_cast<Eigen::Index>(rows()));
    apply(s, {out.data(), rows()});
    return out;
}

double TransitionMatrix::frobenius_squared() const { return simd::sum_squares(data()); }

Dataset::Dataset(Matrix features, Matrix outputs, std::vector<std::int64_t> timestamps,
                 std::optional<KernelConfig> config)
    : features_(std::move(features)),
      outputs_(std::move(outputs)),
      timestamps_(std::move(timestamps)),
      config_(config) {
    if (features_.cols() != outputs_.cols()) {
        throw InvalidInput("dataset has " + std::to_string(features_.cols()) + " feature columns but " +
                           std::to_string(outputs_.cols()) + " output columns");
    }
    if (!timestamps_.empty() && timestamps_.size() != size()) {
        throw InvalidInput("dataset timestamp count does not match sample count");
    }
    if (config_) {
        if (feature_dim() != config_->p() || output_dim() != config_->n) {
            throw InvalidInput("dataset shape (p=" + std::to_string(feature_dim()) + ", n=" +
                               std::to_string(output_dim()) + ") does not match kernel config (p=" +
                               std::to_string(config_->p()) + ", n=" + std::to_string(config_->n) + ")");
        }
        for (std::size_t t = 0; t < size(); ++t) {
            if (features_(features_.rows() - 1, static_cast<Eigen::Index>(t)) != 1.0) {
                throw InvalidInput("feature column " + std::to_string(t) + " does not end in the constant 1");
            }
        }
    }
    if (!all_finite(features_.data(), static_cast<std::size_t>(features_.size())) ||
        !all_finite(outputs_.data(), static_cast<std::size_t>(outputs_.size()))) {
        throw InvalidInput("dataset has non-finite entries");
    }
}

SamplePair Dataset::pair(std::size_t t) const {
    return SamplePair{features_.col(static_cast<Eigen::Index>(t)), outputs_.col(static_cast<Eigen::Index>(t))};
}

Dataset Dataset::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > size()) {
        throw InvalidInput("slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                           ") exceeds dataset of size " + std::to_string(size()));
    }
    const auto b = static_cast<Eigen::Index>(begin);
    const auto c = static_cast<Eigen::Index>(count);
    std::vector<std::int64_t> ts;
    if (!timestamps_.empty()) ts.assign(timestamps_.begin() + b, timestamps_.begin() + b + c);
    Dataset out;
    out.features_ = features_.middleCols(b, c);
    out.outputs_ = outputs_.middleCols(b, c);
    out.timestamps_ = std::move(ts);
    out.config_ = config_;
    return out;
}

Dataset Dataset::concat(const Dataset& first, const Dataset& second) {
    if (first.empty()) return second;
    if (second.empty()) return first;
    if (first.feature_dim() != second.feature_dim() || first.output_dim() != second.output_dim()) {
        throw InvalidInput("cannot concatenate datasets of different shapes");
    }
    Dataset out;
    out.features_.resize(first.features_.rows(), first.features_.cols() + second.features_.cols());
    out.features_ << first.features_, second.features_;
    out.outputs_.resize(first.outputs_.rows(), first.outputs_.cols() + second.outputs_.cols());
    out.outputs_ << first.outputs_, second.outputs_;
    if (!first.timestamps_.empty() && !second.timestamps_.empty()) {
        out.timestamps_ = first.timestamps_;
        out.timestamps_.insert(out.timestamps_.end(), second.timestamps_.begin(), second.timestamps_.end());
    }
    out.config_ = first.config_ == second.config_ ? first.config_ : std::nullopt;
    return out;
}

void featurize_into(std::span<const double> x, std::span<const double> u, const KernelConfig& config,
                    std::span<double> out) {
    if (x.size() != config.n || u.size() != config.k) {
        throw InvalidInput("featurize expects x of length " + std::to_string(config.n) + " and u of length " +
                           std::to_string(config.k) + ", got " + std::to_string(x.size()) + " and " +
                           std::to_string(u.size()));
    }
    if (out.size() != config.p()) throw InvalidInput("featurize output buffer has wrong length");
    const std::size_t d = config.d;
    auto fill_block = [d](std::span<const double> values, double* block) {
        const std::size_t m = values.size();
        for (std::size_t i = 0; i < m; ++i) {
            if (!std::isfinite(values[i])) throw InvalidInput("featurize input is not finite");
            // power 1 sits in the last sub-block, power d in the first
            double pw = values[i];
            block[(d - 1) * m + i] = pw;
            for (std::size_t power = 2; power <= d; ++power) {
                pw *= values[i];
                block[(d - power) * m + i] = pw;
            }
        }
    };
    fill_block(x, out.data());
    fill_block(u, out.data() + d * config.n);
    out[config.p() - 1] = 1.0;
}

Vector featurize(std::span<const double> x, std::span<const double> u, const KernelConfig& config) {
    Vector out(static_cast<Eigen::Index>(config.p()));
    featurize_into(x, u, config, {out.data(), config.p()});
    return out;
}

Dataset featurize_dataset(const RawDataset& raw, std::size_t degree) {
    const std::size_t count = raw.size();
    if (static_cast<std::size_t>(raw.dependent.cols()) != count ||
        static_cast<std::size_t>(raw.independent.cols()) != count) {
        throw InvalidInput("raw dataset columns disagree in length");
    }
    if (raw.dependent.rows() != raw.outputs.rows()) {
        throw InvalidInput("raw dataset outputs must have the same dimension as the dependent state");
    }
    const KernelConfig config = KernelConfig::make(static_cast<std::size_t>(raw.dependent.rows()),
                                                   static_cast<std::size_t>(raw.independent.rows()), degree);
    Matrix features(static_cast<Eigen::Index>(config.p()), static_cast<Eigen::Index>(count));
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(count); ++t) {
        featurize_into({raw.dependent.data() + t * raw.dependent.rows(), config.n},
                       {raw.independent.data() + t * raw.independent.rows(), config.k}, config,
                       {features.data() + t * features.rows(), config.p()});
    }
    return Dataset(std::move(features), raw.outputs, raw.timestamps, config);
}

Dataset simulate(const TransitionMatrix& a, const Matrix& inputs, double noise_scale, std::uint64_t seed) {
    if (static_cast<std::size_t>(inputs.rows()) != a.cols()) {
        throw InvalidInput("simulate: inputs have " + std::to_string(inputs.rows()) + " rows but the matrix has " +
                           std::to_string(a.cols()) + " columns");
    }
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
        throw InvalidInput("simulate: noise scale must be finite and >= 0");
    }
    Rng rng(seed);
    const std::size_t n = a.rows();
    Matrix outputs(static_cast<Eigen::Index>(n), inputs.cols());
    for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
        std::span<double> out{outputs.data() + t * outputs.rows(), n};
        a.apply({inputs.data() + t * inputs.rows(), a.cols()}, out);
        if (noise_scale > 0.0) {
            for (double& v : out) v += noise_scale * rng.normal();
        }
    }
    return Dataset(inputs, std::move(outputs), {}, a.config());
}

TransitionMatrix perturb_matrix(const TransitionMatrix& a, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("perturb_matrix: sigma must be finite and >= 0");
    if (sigma == 0.0) return a;
    Rng rng(seed);
    RowMatrix b = a.entries();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] += sigma * rng.normal();
    return TransitionMatrix(std::move(b), a.config());
}

}  // namespace bayesfault
