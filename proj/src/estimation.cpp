#include "bayesfault/estimation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bayesfault/errors.hpp"
#include "bayesfault/simd.hpp"

namespace bayesfault {
namespace {

constexpr double kPivotTolerance = 1e-12;

struct NormalEquations {
    Matrix gram;  // p x p, sum_i w_i S_i S_i' + alpha I
    Matrix rhs;   // p x n, sum_i w_i S_i X_i'
};

void accumulate(NormalEquations& eq, const Dataset& data, double weight) {
    if (data.empty() || weight == 0.0) return;
    eq.gram.noalias() += weight * data.features() * data.features().transpose();
    eq.rhs.noalias() += weight * data.features() * data.outputs().transpose();
}

std::optional<KernelConfig> resolve_kernel(const Dataset& data, const FitConfig& config) {
    if (config.kernel && data.config() && !(*config.kernel == *data.config())) {
        throw InvalidInput("fit config kernel does not match the dataset's kernel");
    }
    if (config.kernel && static_cast<std::size_t>(data.feature_dim()) != config.kernel->p()) {
        throw InvalidInput("dataset feature dimension " + std::to_string(data.feature_dim()) +
                           " does not match kernel p = " + std::to_string(config.kernel->p()));
    }
    return config.kernel ? config.kernel : data.config();
}

TransitionMatrix solve(const NormalEquations& eq, double alpha, std::optional<KernelConfig> kernel) {
    const Eigen::Index p = eq.gram.rows();
    Matrix gram = eq.gram;
    gram.diagonal().array() += alpha;

    const Eigen::LDLT<Matrix> ldlt(gram);
    const Vector pivots = ldlt.vectorD();
    const double largest = pivots.cwiseAbs().maxCoeff();
    Eigen::VectorXi order = Eigen::VectorXi::LinSpaced(p, 0, static_cast<int>(p - 1));
    order = ldlt.transpositionsP() * order;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(pivots(i) > kPivotTolerance * largest) || !std::isfinite(pivots(i))) {
            const auto dim = static_cast<std::size_t>(order(i));
            throw SingularSystem("normal equations are rank deficient: feature dimension " + std::to_string(dim) +
                                     " is linearly dependent on the others (alpha = " + std::to_string(alpha) + ")",
                                 dim);
        }
    }
    const Matrix wt = ldlt.solve(eq.rhs);  // p x n
    RowMatrix w = wt.transpose();
    if (!w.allFinite()) throw NumericalFailure("least-squares solution is not finite");
    return TransitionMatrix(std::move(w), kernel);
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw InvalidInput("ridge alpha must be finite and >= 0");
}

}  // namespace

FitConfig FitConfig::make(double ridge_alpha, std::optional<KernelConfig> kernel) {
    check_alpha(ridge_alpha);
    return FitConfig{ridge_alpha, kernel};
}

WlsWeights WlsWeights::make(double source_weight, double target_weight) {
    if (!(source_weight > 0.0) || !(target_weight > 0.0) || !std::isfinite(source_weight) ||
        !std::isfinite(target_weight)) {
        throw InvalidInput("WLS weights must be finite and strictly positive");
    }
    return WlsWeights{source_weight, target_weight};
}

TransitionMatrix fit_ls(const Dataset& data, const FitConfig& config) {
    check_alpha(config.ridge_alpha);
    if (data.empty()) throw InvalidInput("fit_ls needs at least one sample");
    const auto kernel = resolve_kernel(data, config);
    const auto p = static_cast<Eigen::Index>(data.feature_dim());
    const auto n = static_cast<Eigen::Index>(data.output_dim());
    NormalEquations eq{Matrix::Zero(p, p), Matrix::Zero(p, n)};
    accumulate(eq, data, 1.0);
    return solve(eq, config.ridge_alpha, kernel);
}

TransitionMatrix fit_wls(const Dataset& source, const Dataset& target, const WlsWeights& weights,
                         const FitConfig& config) {
    check_alpha(config.ridge_alpha);
    if (!(weights.source_weight >= 0.0) || !(weights.target_weight >= 0.0) ||
        !std::isfinite(weights.source_weight) || !std::isfinite(weights.target_weight)) {
        throw InvalidInput("WLS weights must be finite and non-negative");
    }
    if (source.feature_dim() != target.feature_dim() || source.output_dim() != target.output_dim()) {
        throw InvalidInput("source (p=" + std::to_string(source.feature_dim()) + ", n=" +
                           std::to_string(source.output_dim()) + ") and target (p=" +
                           std::to_string(target.feature_dim()) + ", n=" + std::to_string(target.output_dim()) +
                           ") datasets have different shapes");
    }
    if (source.empty() && target.empty()) throw InvalidInput("fit_wls needs at least one sample");
    const auto kernel = resolve_kernel(target.empty() ? source : target, config);
    const auto p = static_cast<Eigen::Index>(target.feature_dim());
    const auto n = static_cast<Eigen::Index>(target.output_dim());
    NormalEquations eq{Matrix::Zero(p, p), Matrix::Zero(p, n)};
    accumulate(eq, source, weights.source_weight);
    accumulate(eq, target, weights.target_weight);
    return solve(eq, config.ridge_alpha, kernel);
}

double mse(const TransitionMatrix& a, const Dataset& data) {
    if (data.empty()) throw InvalidInput("mse of an empty dataset is undefined");
    if (data.feature_dim() != a.cols() || data.output_dim() != a.rows()) {
        throw InvalidInput("mse: dataset (p=" + std::to_string(data.feature_dim()) + ", n=" +
                           std::to_string(data.output_dim()) + ") does not match " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " matrix");
    }
    std::vector<double> predicted(a.rows());
    double total = 0.0;
    for (std::size_t t = 0; t < data.size(); ++t) {
        a.apply(data.s(t), predicted);
        total += simd::squared_distance(data.x(t), predicted);
    }
    return total / static_cast<double>(data.size() * data.output_dim());
}

TransferResult transfer(const Dataset& source, const Dataset& target_train, const Dataset& target_valid,
                        const std::vector<WlsWeights>& weight_grid, const FitConfig& config) {
    if (weight_grid.empty()) throw InvalidInput("transfer needs a non-empty weight grid");
    if (target_valid.empty()) throw InvalidInput("transfer needs a non-empty validation set");
    CvReport report;
    std::optional<TransitionMatrix> best;
    for (const WlsWeights& w : weight_grid) {
        TransitionMatrix fit = fit_wls(source, target_train, w, config);
        CvCell cell;
        cell.alpha = config.ridge_alpha;
        cell.source_weight = w.source_weight;
        cell.target_weight = w.target_weight;
        cell.mse = mse(fit, target_valid);
        report.grid.push_back(cell);
        const std::size_t idx = report.grid.size() - 1;
        const CvCell* incumbent = best ? &report.grid[report.best_index] : nullptr;
        if (!incumbent || cell.mse < incumbent->mse ||
            (cell.mse == incumbent->mse && cell.target_weight > incumbent->target_weight)) {
            report.best_index = idx;
            best = std::move(fit);
        }
    }
    return TransferResult{std::move(*best), std::move(report)};
}

CvReport cross_validate_model(const RawDataset& train, const RawDataset& valid,
                              const std::vector<std::size_t>& degree_grid, const std::vector<double>& alpha_grid) {
    if (degree_grid.empty() || alpha_grid.empty()) throw InvalidInput("cross-validation grids must be non-empty");
    CvReport report;
    bool found = false;
    for (std::size_t degree : degree_grid) {
        const Dataset train_set = featurize_dataset(train, degree);
        const Dataset valid_set = featurize_dataset(valid, degree);
        for (double alpha : alpha_grid) {
            CvCell cell;
            cell.degree = degree;
            cell.alpha = alpha;
            try {
                const TransitionMatrix fit = fit_ls(train_set, FitConfig::make(alpha));
                cell.mse = mse(fit, valid_set);
            } catch (const SingularSystem& e) {
                cell.mse = std::numeric_limits<double>::infinity();
                cell.singular = true;
                cell.error = e.what();
            }
            report.grid.push_back(cell);
            const std::size_t idx = report.grid.size() - 1;
            if (!found || cell.mse < report.grid[report.best_index].mse) {
                report.best_index = idx;
                found = true;
            }
        }
    }
    return report;
}

}  // namespace bayesfault
