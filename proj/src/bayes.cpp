#include "bayesfault/bayes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bayesfault/errors.hpp"
#include "bayesfault/random.hpp"
#include "bayesfault/simd.hpp"

namespace bayesfault {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_dims(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a) {
    if (x.size() != a.rows() || s.size() != a.cols()) {
        throw InvalidInput("dimension mismatch: matrix is " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + ", x has length " + std::to_string(x.size()) +
                           ", s has length " + std::to_string(s.size()));
    }
}

// Evaluates the separated classifier terms for many samples against one
// matrix, reusing scratch buffers.
class FeatureEvaluator {
public:
    explicit FeatureEvaluator(const TransitionMatrix& a)
        : a_(a), a_norm2_(a.frobenius_squared()), as_(a.rows()), d_(a.rows() * a.cols()), ds_(a.rows()) {}

    ClassifierFeatures operator()(std::span<const double> s, std::span<const double> x) {
        check_dims(x, s, a_);
        const std::size_t n = a_.rows();
        const std::size_t p = a_.cols();
        const double q = simd::sum_squares(s);

        ClassifierFeatures f;
        a_.apply(s, as_);
        f.residual_trace = simd::squared_distance(x, as_);

        // D = x s' + A, row by row.
        const auto a_data = a_.data();
        std::copy(a_data.begin(), a_data.end(), d_.begin());
        for (std::size_t i = 0; i < n; ++i) simd::axpy(x[i], s, std::span<double>(d_).subspan(i * p, p));

        // Tr[(D C^-1)' D] = Tr[D C^-1 D'] = ||D||_F^2 - ||D s||^2 / (1 + s's)
        simd::gemv(d_, n, p, s, ds_);
        // Grouped so that s = 0 (D = A) reduces exactly to ||x||^2.
        f.cross_trace =
            simd::sum_squares(x) + (a_norm2_ - simd::sum_squares(d_)) + simd::sum_squares(ds_) / (1.0 + q);
        f.logdet_term = -std::log1p(q);
        return f;
    }

private:
    const TransitionMatrix& a_;
    double a_norm2_;
    std::vector<double> as_;
    std::vector<double> d_;
    std::vector<double> ds_;
};

void require_window(const Dataset& data, const TransitionMatrix& a, std::size_t window) {
    if (window == 0) throw InvalidInput("window length must be >= 1");
    if (data.feature_dim() != a.cols() || data.output_dim() != a.rows()) {
        throw InvalidInput("dataset (p=" + std::to_string(data.feature_dim()) + ", n=" +
                           std::to_string(data.output_dim()) + ") does not match " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " matrix");
    }
}

}  // namespace

double loglik_normal(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a) {
    check_dims(x, s, a);
    const Vector as = a.apply(s);
    const double r2 = simd::squared_distance(x, {as.data(), a.rows()});
    return -0.5 * static_cast<double>(a.rows()) * kLog2Pi - 0.5 * r2;
}

double loglik_fault(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a) {
    FeatureEvaluator eval(a);
    return loglik_fault_from_features(eval(s, x), a.rows());
}

double loglik_fault_marginal(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a) {
    check_dims(x, s, a);
    const double var = 1.0 + simd::sum_squares(s);
    const Vector as = a.apply(s);
    const double r2 = simd::squared_distance(x, {as.data(), a.rows()});
    const double n = static_cast<double>(a.rows());
    return -0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * r2 / var;
}

McEstimate mc_posterior_oracle(std::span<const double> x, std::span<const double> s, const TransitionMatrix& a,
                               std::size_t draws, std::uint64_t seed) {
    check_dims(x, s, a);
    if (draws < 1000) throw InvalidInput("mc_posterior_oracle needs at least 1000 draws");
    const std::size_t n = a.rows();
    const std::size_t p = a.cols();
    Rng rng(seed);

    std::vector<double> b(n * p);
    std::vector<double> bs(n);
    std::vector<double> logw(draws);
    const auto a_data = a.data();
    const double norm = -0.5 * static_cast<double>(n) * kLog2Pi;
    for (std::size_t k = 0; k < draws; ++k) {
        for (std::size_t i = 0; i < n * p; ++i) b[i] = a_data[i] + rng.normal();
        simd::gemv(b, n, p, s, bs);
        logw[k] = norm - 0.5 * simd::squared_distance(x, bs);
    }

    double shift = logw[0];
    for (double v : logw) shift = std::max(shift, v);
    double sum = 0.0;
    double sum2 = 0.0;
    for (double v : logw) {
        const double w = std::exp(v - shift);
        sum += w;
        sum2 += w * w;
    }
    const double count = static_cast<double>(draws);
    const double mean = sum / count;
    const double var = std::max(0.0, (sum2 / count - mean * mean) * count / (count - 1.0));
    McEstimate out{shift + std::log(mean), std::sqrt(var / count) / mean};
    if (!std::isfinite(out.estimate) || !std::isfinite(out.std_error)) {
        throw NumericalFailure("mc_posterior_oracle produced a non-finite estimate");
    }
    return out;
}

LogLikRatio classify_single(std::span<const double> s, std::span<const double> x, const TransitionMatrix& a) {
    const double value = loglik_normal(x, s, a) - loglik_fault(x, s, a);
    return {value, decide(value)};
}

LogLikRatio classify_sequence(const Dataset& data, const TransitionMatrix& a) {
    require_window(data, a, 1);
    if (data.empty()) throw InvalidInput("classify_sequence needs a non-empty dataset");
    double value = 0.0;
    for (std::size_t t = 0; t < data.size(); ++t) value += classify_single(data.s(t), data.x(t), a).value;
    return {value, decide(value)};
}

std::vector<LogLikRatio> classify_windows(const Dataset& data, const TransitionMatrix& a, std::size_t window) {
    require_window(data, a, window);
    std::vector<LogLikRatio> out;
    out.reserve(data.size() / window);
    for (std::size_t begin = 0; begin + window <= data.size(); begin += window) {
        double value = 0.0;
        for (std::size_t t = begin; t < begin + window; ++t) value += classify_single(data.s(t), data.x(t), a).value;
        out.push_back({value, decide(value)});
    }
    return out;
}

ClassifierFeatures extract_features(std::span<const double> s, std::span<const double> x, const TransitionMatrix& a) {
    FeatureEvaluator eval(a);
    return eval(s, x);
}

std::vector<ClassifierFeatures> window_features(const Dataset& data, const TransitionMatrix& a, std::size_t window) {
    require_window(data, a, window);
    FeatureEvaluator eval(a);
    std::vector<ClassifierFeatures> out;
    out.reserve(data.size() / window);
    for (std::size_t begin = 0; begin + window <= data.size(); begin += window) {
        ClassifierFeatures sum;
        for (std::size_t t = begin; t < begin + window; ++t) sum += eval(data.s(t), data.x(t));
        out.push_back(sum);
    }
    return out;
}

double loglik_normal_from_features(const ClassifierFeatures& f, std::size_t n, std::size_t samples) {
    return -0.5 * f.residual_trace - 0.5 * static_cast<double>(n * samples) * kLog2Pi;
}

double loglik_fault_from_features(const ClassifierFeatures& f, std::size_t n, std::size_t samples) {
    const double half_n = 0.5 * static_cast<double>(n);
    return -0.5 * f.cross_trace + half_n * f.logdet_term - half_n * static_cast<double>(samples) * kLog2Pi;
}

Matrix rank_one_inverse(std::span<const double> s) {
    const auto p = static_cast<Eigen::Index>(s.size());
    const Eigen::Map<const Vector> v(s.data(), p);
    const double q = simd::sum_squares(s);
    Matrix inv = Matrix::Identity(p, p);
    inv.noalias() -= (v * v.transpose()) / (1.0 + q);
    return inv;
}

double rank_one_logdet(std::span<const double> s) { return std::log1p(simd::sum_squares(s)); }

}  // namespace bayesfault
