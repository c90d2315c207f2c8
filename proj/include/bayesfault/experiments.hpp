#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bayesfault/data_pipeline.hpp"
#include "bayesfault/estimation.hpp"
#include "bayesfault/mlp.hpp"

namespace bayesfault {

/// One long-form result row. `params` lines up with ExperimentResult::param_names.
struct ExperimentRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> params;
    std::string metric;
    double value = 0.0;
};

struct ExperimentResult {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<std::string> param_names;
    std::vector<std::string> metadata;  ///< "key=value" lines, written as '#' comments
    std::vector<ExperimentRow> rows;

    void add(std::size_t trial, std::uint64_t row_seed, std::vector<std::string> params, std::string metric,
             double value);
    /// Stable sort by (trial, params, metric) so output never depends on evaluation order.
    void sort_rows();
    /// Rows whose metric matches and whose named parameter equals `value` (empty name matches all).
    std::vector<const ExperimentRow*> select(const std::string& metric, const std::string& param = {},
                                             const std::string& value = {}) const;
    const std::string& param(const ExperimentRow& row, const std::string& name) const;

    void write_csv(std::ostream& out) const;
    void write_csv(const std::filesystem::path& path) const;
};

/// Shortest round-trip decimal form.
std::string format_number(double value);
std::string format_number(std::size_t value);

// ---------------------------------------------------------------------------
// Monte Carlo F1 versus matrix divergence.

struct McF1Options {
    std::size_t trials = 200;
    std::size_t samples = 1000;
    std::vector<std::size_t> lags{1, 5, 10};
    double sigma = 1.0;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per trial: B = A + sigma N(0, 1) with A = diag(0.9, -0.4), `samples` i.i.d.
/// pairs with s ~ N(0, I) under each of A and B, non-overlapping windows per
/// lag classified against A. Rows: (trial, seed, frobenius, lag) -> f1,
/// precision, recall.
ExperimentResult run_mc_f1(const McF1Options& options);

/// The fixed generator of the Monte Carlo study.
TransitionMatrix mc_reference_matrix();

// ---------------------------------------------------------------------------
// Transfer learning curve.

enum class TransferModel { Linear, Mlp };

struct TransferCurveOptions {
    ScenarioSpec scenario;
    std::vector<std::size_t> sample_counts{24, 48, 72, 168};
    std::size_t resamples = 100;
    TransferModel model = TransferModel::Linear;
    WlsWeights weights{0.01, 10.0};
    double ridge_alpha = 0.5;
    MlpFitOptions source_fit{0.05, 200, 32, 0};  ///< building-1 MLP and the all-data baseline
    MlpFitOptions target_fit{0.05, 60, 8, 0};    ///< warm and cold arms on the sampled window
    double target_train_fraction = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Building-1 data is split chronologically and its first part trains the
/// source model. Building-2 normal data is split into a training pool and a
/// fixed validation block. For every (count, resample) a contiguous window of
/// the pool is drawn and both arms are fit on it. Rows: (trial, seed, count,
/// arm) -> mse, with arms "transfer", "scratch" and one "baseline" row fit on
/// the whole pool.
ExperimentResult run_transfer_curve(const TransferCurveOptions& options);

// ---------------------------------------------------------------------------
// Logistic fault study with transfer.

struct FaultStudyOptions {
    // 2000 held-out normal samples per building after the fits.
    ScenarioSpec scenario{.source_samples = 4000, .target_samples = 2336};
    std::size_t window = 10;
    double ridge_alpha = 0.5;
    WlsWeights weights{0.01, 10.0};
    double learn_rate = 1.0;
    std::size_t epochs = 20000;
    double source_fit_fraction = 0.5;        ///< share of building-1 normal data used to fit A-hat
    std::size_t transfer_train_samples = 336;  ///< building-2 normal samples used for the WLS fit
    double classifier_train_fraction = 0.5;  ///< share of labeled windows that trains C_log
    std::uint64_t seed = 0;

    void validate() const;
};

/// Two phases, "source" (building 1, A-hat by least squares) and "transfer"
/// (building 2, A-hat by WLS on building-1 data plus the first
/// transfer_train_samples building-2 samples). In each phase the remaining
/// normal data and the fault data are cut into non-overlapping windows, the
/// classes are balanced, each class is split chronologically into C_log
/// train/validation parts and the validation windows are scored. Rows per
/// validation window carry the +1 (fault) / -1 (normal) decision and truth;
/// summary rows carry precision, recall, f1 and the window counts.
ExperimentResult run_fault_study(const FaultStudyOptions& options);

}  // namespace bayesfault
