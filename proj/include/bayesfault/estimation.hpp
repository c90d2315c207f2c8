#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bayesfault/kernel_model.hpp"

namespace bayesfault {

struct FitConfig {
    double ridge_alpha = 0.0;  ///< weight on ||W||_F^2
    std::optional<KernelConfig> kernel;

    static FitConfig make(double ridge_alpha, std::optional<KernelConfig> kernel = std::nullopt);
};

/// Relative weights of source-building and target-building samples.
struct WlsWeights {
    double source_weight = 1.0;
    double target_weight = 1.0;

    /// Both weights must be finite and strictly positive.
    static WlsWeights make(double source_weight, double target_weight);
};

/// One evaluated grid cell. Fields that do not apply to a search are left at 0.
struct CvCell {
    std::size_t degree = 0;
    double alpha = 0.0;
    double source_weight = 0.0;
    double target_weight = 0.0;
    double mse = 0.0;  ///< +inf when the fit failed
    bool singular = false;
    std::string error;
};

struct CvReport {
    std::vector<CvCell> grid;
    std::size_t best_index = 0;

    const CvCell& best() const { return grid.at(best_index); }
    double best_mse() const { return best().mse; }
};

/// argmin_W ||W S - X||^2 + alpha ||W||_F^2 = X S' (S S' + alpha I)^-1.
/// Throws SingularSystem if the regularized Gram matrix is not positive definite.
TransitionMatrix fit_ls(const Dataset& data, const FitConfig& config);

/// argmin_W w1 ||W S1 - X1||^2 + w2 ||W S2 - X2||^2 + alpha ||W||_F^2.
TransitionMatrix fit_wls(const Dataset& source, const Dataset& target, const WlsWeights& weights,
                         const FitConfig& config);

/// Mean over all n*T entries of (X - A S)^2.
double mse(const TransitionMatrix& a, const Dataset& data);

struct TransferResult {
    TransitionMatrix matrix;
    CvReport report;
};

/// WLS fit for every weight pair, scored on target_valid. Ties go to the
/// larger target weight.
TransferResult transfer(const Dataset& source, const Dataset& target_train, const Dataset& target_valid,
                        const std::vector<WlsWeights>& weight_grid, const FitConfig& config);

/// Grid search over polynomial degree and ridge weight. Cells whose fit is
/// singular are kept in the report with mse = +inf.
CvReport cross_validate_model(const RawDataset& train, const RawDataset& valid,
                              const std::vector<std::size_t>& degree_grid, const std::vector<double>& alpha_grid);

}  // namespace bayesfault
