#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bayesfault {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape of the polynomial feature map: n dependent variables, k independent
/// variables, degree d. Features are laid out power-major,
///   [x^d, ..., x^1, u^d, ..., u^1, 1]
/// with a single shared constant, so p = d(n + k) + 1.
struct KernelConfig {
    std::size_t n = 1;
    std::size_t k = 0;
    std::size_t d = 1;

    /// Validating constructor; throws InvalidInput on n = 0 or d = 0.
    static KernelConfig make(std::size_t n, std::size_t k, std::size_t d);

    std::size_t p() const noexcept { return d * (n + k) + 1; }

    /// Human-readable column names, e.g. "x0^2", "u1^1", "const".
    std::vector<std::string> feature_names() const;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// n x p state transition matrix. Stored row-major so that A s is a run of
/// contiguous dot products. The kernel config is absent for plain linear
/// models whose inputs are not polynomial features.
class TransitionMatrix {
public:
    explicit TransitionMatrix(RowMatrix entries, std::optional<KernelConfig> config = std::nullopt);

    static TransitionMatrix zeros(const KernelConfig& config);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

    const RowMatrix& entries() const noexcept { return entries_; }
    const std::optional<KernelConfig>& config() const noexcept { return config_; }
    std::span<const double> data() const noexcept {
        return {entries_.data(), static_cast<std::size_t>(entries_.size())};
    }
    std::span<const double> row(std::size_t i) const noexcept {
        return {entries_.data() + i * cols(), cols()};
    }

    /// out = A s. Sizes are checked.
    void apply(std::span<const double> s, std::span<double> out) const;
    Vector apply(std::span<const double> s) const;

    double frobenius_squared() const;

private:
    RowMatrix entries_;
    std::optional<KernelConfig> config_;
};

/// One featurized observation (s_t, x_{t+1}).
struct SamplePair {
    Vector s;
    Vector x;
};

/// Column-stacked observations: features S (p x T) and outputs X (n x T).
/// When a kernel config is attached, every column of S ends in 1.
class Dataset {
public:
    Dataset() = default;
    Dataset(Matrix features, Matrix outputs, std::vector<std::int64_t> timestamps = {},
            std::optional<KernelConfig> config = std::nullopt);

    std::size_t size() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    bool empty() const noexcept { return size() == 0; }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(outputs_.rows()); }

    const Matrix& features() const noexcept { return features_; }
    const Matrix& outputs() const noexcept { return outputs_; }
    const std::vector<std::int64_t>& timestamps() const noexcept { return timestamps_; }
    const std::optional<KernelConfig>& config() const noexcept { return config_; }

    std::span<const double> s(std::size_t t) const noexcept {
        return {features_.data() + t * feature_dim(), feature_dim()};
    }
    std::span<const double> x(std::size_t t) const noexcept {
        return {outputs_.data() + t * output_dim(), output_dim()};
    }
    SamplePair pair(std::size_t t) const;

    /// Columns [begin, begin + count).
    Dataset slice(std::size_t begin, std::size_t count) const;
    static Dataset concat(const Dataset& first, const Dataset& second);

private:
    Matrix features_;
    Matrix outputs_;
    std::vector<std::int64_t> timestamps_;
    std::optional<KernelConfig> config_;
};

/// Unfeaturized observations: dependent state x_t (n x T), independent
/// inputs u_t (k x T) and the next dependent state x_{t+1} (n x T).
struct RawDataset {
    Matrix dependent;
    Matrix independent;
    Matrix outputs;
    std::vector<std::int64_t> timestamps;

    std::size_t size() const noexcept { return static_cast<std::size_t>(outputs.cols()); }
};

/// Featurizes every column of a raw dataset at degree d.
Dataset featurize_dataset(const RawDataset& raw, std::size_t degree);

/// Polynomial feature map. Powers are formed by repeated multiplication so
/// negative inputs keep exact signs.
Vector featurize(std::span<const double> x, std::span<const double> u, const KernelConfig& config);
void featurize_into(std::span<const double> x, std::span<const double> u, const KernelConfig& config,
                    std::span<double> out);

/// x_{t+1} = A s_t + eps_t, eps_t ~ N(0, noise_scale^2 I), one column of
/// `inputs` per sample.
Dataset simulate(const TransitionMatrix& a, const Matrix& inputs, double noise_scale, std::uint64_t seed);

/// b_ij = a_ij + N(0, sigma^2). sigma = 0 returns an exact copy.
TransitionMatrix perturb_matrix(const TransitionMatrix& a, double sigma, std::uint64_t seed);

}  // namespace bayesfault
