#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bayesfault/kernel_model.hpp"

namespace bayesfault {

/// Hourly telemetry: an integer hour-index timestamp per row plus named
/// real-valued columns. `values` is rows x columns.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::int64_t> timestamps;
    Matrix values;

    std::size_t rows() const noexcept { return timestamps.size(); }
    std::size_t cols() const noexcept { return columns.size(); }
    /// Index of a named column; throws InvalidInput if absent.
    std::size_t column_index(const std::string& name) const;
    /// Rows [begin, begin + count).
    RawTable slice(std::size_t begin, std::size_t count) const;
    /// Throws InvalidInput when the shape is ragged or timestamps are not consecutive hours.
    void validate() const;
};

/// Reads `timestamp,<col>,...` CSV. Ragged rows, non-numeric cells and
/// non-consecutive timestamps raise ParseError with the offending location.
RawTable load_csv(const std::filesystem::path& path);
RawTable parse_csv(std::istream& in);
void write_csv(const RawTable& table, const std::filesystem::path& path);
void write_csv(const RawTable& table, std::ostream& out);

/// Per-column min/max from training data.
struct NormalizationParams {
    std::vector<std::string> columns;
    std::vector<double> min;
    std::vector<double> max;

    bool constant(std::size_t column) const { return !(max.at(column) > min.at(column)); }
};

NormalizationParams compute_normalization(const RawTable& train);
/// (x - min) / (max - min); constant columns map to 0. Values outside the
/// training range are kept, not clipped.
RawTable normalize(const RawTable& table, const NormalizationParams& params);
/// Computes parameters from `table` itself and applies them.
std::pair<RawTable, NormalizationParams> normalize(const RawTable& table);
RawTable denormalize(const RawTable& table, const NormalizationParams& params);

/// Two-row CSV: header of column names, then the min row, then the max row.
void save_normalization(const NormalizationParams& params, const std::filesystem::path& path);
NormalizationParams load_normalization(const std::filesystem::path& path);

/// (cos 2pi h/24, sin 2pi h/24, cos 2pi d/7, sin 2pi d/7)
std::array<double, 4> embed_time(int hour_of_day, int day_of_week);

/// Appends hour/day unit-circle columns derived from the hour-index timestamp
/// (hour 0 is midnight of day 0).
RawTable add_time_embedding(const RawTable& table);

/// First ceil(fraction * T) rows train, the rest validation.
std::pair<RawTable, RawTable> split_chronological(const RawTable& table, double fraction);

/// Pairs (s_t, x_{t+1}) from consecutive rows. With window > 1 the previous
/// window-1 rows are stacked in as extra independent inputs:
///   u'_t = [x_{t-1}, ..., x_{t-w+1}, u_t, ..., u_{t-w+1}]
/// so config.k must equal (w-1)*n + w*k_raw.
RawDataset build_raw_dataset(const RawTable& table, const std::vector<std::string>& dependent,
                             const std::vector<std::string>& independent, std::size_t window = 1);
Dataset build_dataset(const RawTable& table, const std::vector<std::string>& dependent,
                      const std::vector<std::string>& independent, const KernelConfig& config,
                      std::size_t window = 1);

// ---------------------------------------------------------------------------
// Synthetic building scenarios.

struct ScenarioSpec {
    KernelConfig kernel = KernelConfig{1, 7, 2};
    std::uint64_t matrix_seed = 1;
    double matrix_scale = 1.0;    ///< std. dev. of building-1 matrix entries
    double drift = 0.1;           ///< building-2 matrix = building-1 + drift * N(0, 1)
    double fault_sigma = 1.0;     ///< fault matrix = normal + fault_sigma * N(0, 1)
    std::size_t source_samples = 2000;
    std::size_t target_samples = 672;
    std::size_t fault_samples = 2000;
    double noise_scale = 1.0;

    void validate() const;
};

struct Scenario {
    TransitionMatrix source_matrix;
    TransitionMatrix target_matrix;
    TransitionMatrix target_fault_matrix;
    TransitionMatrix source_fault_matrix;
    Dataset source;        ///< building 1, normal operation
    Dataset target;        ///< building 2, normal operation
    Dataset target_fault;  ///< building 2 under its fault matrix
    Dataset source_fault;  ///< building 1 under its fault matrix
};

/// Smooth hourly raw channels in roughly [0, 1]: a daily cycle with a
/// per-channel phase drawn from `phase_seed` plus AR(1) noise drawn from
/// `seed`. Returns channels x count.
Matrix generate_raw_inputs(std::size_t channels, std::size_t count, std::uint64_t seed, std::uint64_t phase_seed);

/// Building-1 matrix with i.i.d. N(0, scale^2) entries.
TransitionMatrix random_transition_matrix(const KernelConfig& config, double scale, std::uint64_t seed);

/// Pure function of (spec, seed).
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

/// Recursively rolls x_{t+1} = A phi(x_t, u_t) + eps forward from x_0 = 0
/// with synthetic exogenous inputs, producing a table with columns
/// x0..x{n-1}, u0..u{k-1}. Throws NumericalFailure if the trajectory diverges.
RawTable simulate_table(const TransitionMatrix& a, std::size_t rows, double noise_scale, std::uint64_t seed);

}  // namespace bayesfault
