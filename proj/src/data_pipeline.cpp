#include "bayesfault/data_pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string_view>

#include "bayesfault/errors.hpp"
#include "bayesfault/random.hpp"

namespace bayesfault {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    if (text.empty()) return false;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::size_t RawTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw InvalidInput("table has no column named '" + name + "'");
}

RawTable RawTable::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > rows()) throw InvalidInput("table slice out of range");
    RawTable out;
    out.columns = columns;
    out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(begin),
                          timestamps.begin() + static_cast<std::ptrdiff_t>(begin + count));
    out.values = values.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
    return out;
}

void RawTable::validate() const {
    if (static_cast<std::size_t>(values.rows()) != timestamps.size() ||
        static_cast<std::size_t>(values.cols()) != columns.size()) {
        throw InvalidInput("table shape does not match its header and timestamps");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] != timestamps[i - 1] + 1) {
            throw InvalidInput("timestamps must be consecutive hours (row " + std::to_string(i) + ")");
        }
    }
}

RawTable parse_csv(std::istream& in) {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (!have_header) {
            if (fields.empty() || fields[0] != "timestamp") {
                throw ParseError("first header column must be 'timestamp'", line_no, 1);
            }
            for (std::size_t i = 1; i < fields.size(); ++i) {
                if (fields[i].empty()) throw ParseError("empty column name", line_no, i + 1);
                table.columns.emplace_back(fields[i]);
            }
            have_header = true;
            continue;
        }
        if (fields.size() != table.columns.size() + 1) {
            throw ParseError("expected " + std::to_string(table.columns.size() + 1) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        std::int64_t ts = 0;
        if (!parse_number(fields[0], ts)) {
            throw ParseError("timestamp '" + std::string(fields[0]) + "' is not an integer", line_no, 1);
        }
        if (!table.timestamps.empty()) {
            if (ts <= table.timestamps.back()) throw ParseError("timestamps are not strictly increasing", line_no, 1);
            if (ts != table.timestamps.back() + 1) throw ParseError("gap in hourly timestamps", line_no, 1);
        }
        std::vector<double> row(table.columns.size());
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!parse_number(fields[i + 1], row[i]) || !std::isfinite(row[i])) {
                throw ParseError("cell '" + std::string(fields[i + 1]) + "' is not a finite number", line_no, i + 2);
            }
        }
        table.timestamps.push_back(ts);
        rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("missing header row");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return table;
}

RawTable load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return parse_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string(), e);
    }
}

void write_csv(const RawTable& table, std::ostream& out) {
    table.validate();
    std::vector<std::string> cells{"timestamp"};
    cells.insert(cells.end(), table.columns.begin(), table.columns.end());
    write_row(out, cells);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        cells.assign(1, std::to_string(table.timestamps[r]));
        for (std::size_t c = 0; c < table.cols(); ++c) {
            cells.push_back(format_double(table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
        }
        write_row(out, cells);
    }
}

void write_csv(const RawTable& table, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_csv(table, out);
}

NormalizationParams compute_normalization(const RawTable& train) {
    if (train.rows() == 0) throw InvalidInput("cannot compute normalization from an empty table");
    NormalizationParams params;
    params.columns = train.columns;
    for (Eigen::Index c = 0; c < train.values.cols(); ++c) {
        params.min.push_back(train.values.col(c).minCoeff());
        params.max.push_back(train.values.col(c).maxCoeff());
    }
    return params;
}

RawTable normalize(const RawTable& table, const NormalizationParams& params) {
    if (params.columns != table.columns || params.min.size() != table.cols() || params.max.size() != table.cols()) {
        throw InvalidInput("normalization parameters do not cover the table's columns");
    }
    RawTable out = table;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        auto col = out.values.col(static_cast<Eigen::Index>(c));
        if (params.constant(c)) {
            col.setZero();
        } else {
            col = (col.array() - params.min[c]) / (params.max[c] - params.min[c]);
        }
    }
    return out;
}

std::pair<RawTable, NormalizationParams> normalize(const RawTable& table) {
    NormalizationParams params = compute_normalization(table);
    RawTable out = normalize(table, params);
    return {std::move(out), std::move(params)};
}

RawTable denormalize(const RawTable& table, const NormalizationParams& params) {
    if (params.columns != table.columns) throw InvalidInput("normalization parameters do not match the table");
    RawTable out = table;
    for (std::size_t c = 0; c < table.cols(); ++c) {
        auto col = out.values.col(static_cast<Eigen::Index>(c));
        if (params.constant(c)) {
            col.setConstant(params.min[c]);
        } else {
            col = col.array() * (params.max[c] - params.min[c]) + params.min[c];
        }
    }
    return out;
}

void save_normalization(const NormalizationParams& params, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_row(out, params.columns);
    std::vector<std::string> cells;
    for (double v : params.min) cells.push_back(format_double(v));
    write_row(out, cells);
    cells.clear();
    for (double v : params.max) cells.push_back(format_double(v));
    write_row(out, cells);
}

NormalizationParams load_normalization(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    std::string line;
    NormalizationParams params;
    std::vector<std::vector<double>*> targets{&params.min, &params.max};
    std::size_t line_no = 0;
    std::size_t data_rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (params.columns.empty()) {
            for (auto f : fields) params.columns.emplace_back(f);
            continue;
        }
        if (data_rows >= 2) throw ParseError("normalization file has more than two value rows", line_no);
        if (fields.size() != params.columns.size()) throw ParseError("ragged normalization row", line_no);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            double v = 0.0;
            if (!parse_number(fields[i], v)) throw ParseError("not a number", line_no, i + 1);
            targets[data_rows]->push_back(v);
        }
        ++data_rows;
    }
    if (data_rows != 2) throw ParseError(path.string() + ": normalization file needs a min row and a max row");
    for (std::size_t c = 0; c < params.columns.size(); ++c) {
        if (params.max[c] < params.min[c]) throw ParseError("max below min", 0, c + 1);
    }
    return params;
}

std::array<double, 4> embed_time(int hour_of_day, int day_of_week) {
    if (hour_of_day < 0 || hour_of_day > 23) throw InvalidInput("hour of day must be in 0..23");
    if (day_of_week < 0 || day_of_week > 6) throw InvalidInput("day of week must be in 0..6");
    const double h = 2.0 * std::numbers::pi * hour_of_day / 24.0;
    const double d = 2.0 * std::numbers::pi * day_of_week / 7.0;
    return {std::cos(h), std::sin(h), std::cos(d), std::sin(d)};
}

RawTable add_time_embedding(const RawTable& table) {
    RawTable out;
    out.columns = table.columns;
    for (const char* name : {"hour_cos", "hour_sin", "day_cos", "day_sin"}) out.columns.emplace_back(name);
    out.timestamps = table.timestamps;
    out.values.resize(table.values.rows(), table.values.cols() + 4);
    out.values.leftCols(table.values.cols()) = table.values;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        const std::int64_t ts = table.timestamps[r];
        const auto hour = static_cast<int>(((ts % 24) + 24) % 24);
        const std::int64_t day_index = (ts - hour) / 24;
        const auto day = static_cast<int>(((day_index % 7) + 7) % 7);
        const auto emb = embed_time(hour, day);
        for (int j = 0; j < 4; ++j) out.values(static_cast<Eigen::Index>(r), table.values.cols() + j) = emb[j];
    }
    return out;
}

std::pair<RawTable, RawTable> split_chronological(const RawTable& table, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("split fraction must lie in (0, 1)");
    if (table.rows() < 2) throw InvalidInput("cannot split a table with fewer than 2 rows");
    const auto train_rows = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(table.rows())));
    if (train_rows == 0 || train_rows >= table.rows()) {
        throw InvalidInput("split fraction " + std::to_string(fraction) + " leaves an empty partition of " +
                           std::to_string(table.rows()) + " rows");
    }
    return {table.slice(0, train_rows), table.slice(train_rows, table.rows() - train_rows)};
}

RawDataset build_raw_dataset(const RawTable& table, const std::vector<std::string>& dependent,
                             const std::vector<std::string>& independent, std::size_t window) {
    if (window == 0) throw InvalidInput("window must be >= 1");
    if (dependent.empty()) throw InvalidInput("at least one dependent column is required");
    if (table.rows() < window + 1) {
        throw InvalidInput("need at least " + std::to_string(window + 1) + " rows to build a dataset with window " +
                           std::to_string(window));
    }
    std::vector<std::size_t> dep_idx;
    std::vector<std::size_t> ind_idx;
    for (const auto& name : dependent) dep_idx.push_back(table.column_index(name));
    for (const auto& name : independent) ind_idx.push_back(table.column_index(name));

    const std::size_t n = dep_idx.size();
    const std::size_t k = (window - 1) * n + window * ind_idx.size();
    const std::size_t first = window - 1;
    const std::size_t count = table.rows() - 1 - first;
    RawDataset raw;
    raw.dependent.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
    raw.independent.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(count));
    raw.outputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
    auto at = [&](std::size_t row, std::size_t col) {
        return table.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    };
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t t = first + j;
        const auto c = static_cast<Eigen::Index>(j);
        for (std::size_t i = 0; i < n; ++i) {
            raw.dependent(static_cast<Eigen::Index>(i), c) = at(t, dep_idx[i]);
            raw.outputs(static_cast<Eigen::Index>(i), c) = at(t + 1, dep_idx[i]);
        }
        Eigen::Index r = 0;
        for (std::size_t lag = 1; lag < window; ++lag) {
            for (std::size_t i = 0; i < n; ++i) raw.independent(r++, c) = at(t - lag, dep_idx[i]);
        }
        for (std::size_t lag = 0; lag < window; ++lag) {
            for (std::size_t i : ind_idx) raw.independent(r++, c) = at(t - lag, i);
        }
        raw.timestamps.push_back(table.timestamps[t]);
    }
    return raw;
}

Dataset build_dataset(const RawTable& table, const std::vector<std::string>& dependent,
                      const std::vector<std::string>& independent, const KernelConfig& config, std::size_t window) {
    const std::size_t expected_k = (window - 1) * dependent.size() + window * independent.size();
    if (config.n != dependent.size() || config.k != expected_k) {
        throw InvalidInput("kernel config (n=" + std::to_string(config.n) + ", k=" + std::to_string(config.k) +
                           ") does not match the selected columns (n=" + std::to_string(dependent.size()) +
                           ", k=" + std::to_string(expected_k) + ")");
    }
    return featurize_dataset(build_raw_dataset(table, dependent, independent, window), config.d);
}

void ScenarioSpec::validate() const {
    KernelConfig::make(kernel.n, kernel.k, kernel.d);
    for (double v : {matrix_scale, drift, fault_sigma, noise_scale}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("scenario magnitudes must be finite and >= 0");
    }
}

Matrix generate_raw_inputs(std::size_t channels, std::size_t count, std::uint64_t seed, std::uint64_t phase_seed) {
    constexpr double kPersistence = 0.9;
    constexpr double kInnovation = 0.05;
    constexpr double kAmplitude = 0.25;
    Rng rng(seed);
    Rng phases(phase_seed);
    Matrix out(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < channels; ++c) {
        const double phase = phases.uniform(0.0, 2.0 * std::numbers::pi);
        double ar = rng.normal() * kInnovation / std::sqrt(1.0 - kPersistence * kPersistence);
        for (std::size_t t = 0; t < count; ++t) {
            ar = kPersistence * ar + kInnovation * rng.normal();
            const double daily = std::sin(2.0 * std::numbers::pi * static_cast<double>(t % 24) / 24.0 + phase);
            out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = 0.5 + kAmplitude * daily + ar;
        }
    }
    return out;
}

TransitionMatrix random_transition_matrix(const KernelConfig& config, double scale, std::uint64_t seed) {
    Rng rng(seed);
    RowMatrix entries(static_cast<Eigen::Index>(config.n), static_cast<Eigen::Index>(config.p()));
    for (Eigen::Index i = 0; i < entries.size(); ++i) entries.data()[i] = scale * rng.normal();
    return TransitionMatrix(std::move(entries), config);
}

namespace {

Dataset simulate_building(const TransitionMatrix& a, const KernelConfig& config, std::size_t count,
                          double noise_scale, std::uint64_t phase_seed, std::uint64_t input_seed,
                          std::uint64_t noise_seed) {
    const Matrix raw = generate_raw_inputs(config.n + config.k, count, input_seed, phase_seed);
    Matrix features(static_cast<Eigen::Index>(config.p()), static_cast<Eigen::Index>(count));
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(count); ++t) {
        featurize_into({raw.data() + t * raw.rows(), config.n}, {raw.data() + t * raw.rows() + config.n, config.k},
                       config, {features.data() + t * features.rows(), config.p()});
    }
    return simulate(a, features, noise_scale, noise_seed);
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
    spec.validate();
    const KernelConfig& config = spec.kernel;
    TransitionMatrix source = random_transition_matrix(config, spec.matrix_scale, spec.matrix_seed);

    Rng drift_rng(seed, 1);
    RowMatrix target_entries = source.entries();
    if (spec.drift > 0.0) {
        for (Eigen::Index i = 0; i < target_entries.size(); ++i) target_entries.data()[i] += spec.drift * drift_rng.normal();
    }
    TransitionMatrix target(std::move(target_entries), config);
    TransitionMatrix target_fault = perturb_matrix(target, spec.fault_sigma, derive_seed(seed, 2));
    TransitionMatrix source_fault = perturb_matrix(source, spec.fault_sigma, derive_seed(seed, 3));

    // Daily-cycle phases belong to the building, so normal and fault runs of
    // one building share an input distribution.
    const std::uint64_t source_phases = derive_seed(seed, 30);
    const std::uint64_t target_phases = derive_seed(seed, 31);
    Dataset source_data = simulate_building(source, config, spec.source_samples, spec.noise_scale, source_phases,
                                            derive_seed(seed, 10), derive_seed(seed, 20));
    Dataset target_data = simulate_building(target, config, spec.target_samples, spec.noise_scale, target_phases,
                                            derive_seed(seed, 11), derive_seed(seed, 21));
    Dataset target_fault_data = simulate_building(target_fault, config, spec.fault_samples, spec.noise_scale,
                                                  target_phases, derive_seed(seed, 12), derive_seed(seed, 22));
    Dataset source_fault_data = simulate_building(source_fault, config, spec.fault_samples, spec.noise_scale,
                                                  source_phases, derive_seed(seed, 13), derive_seed(seed, 23));
    return Scenario{std::move(source),      std::move(target),      std::move(target_fault),
                    std::move(source_fault), std::move(source_data), std::move(target_data),
                    std::move(target_fault_data), std::move(source_fault_data)};
}

RawTable simulate_table(const TransitionMatrix& a, std::size_t rows, double noise_scale, std::uint64_t seed) {
    if (!a.config()) throw InvalidInput("simulate_table needs a kernelized transition matrix");
    if (rows < 2) throw InvalidInput("simulate_table needs at least 2 rows");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw InvalidInput("noise scale must be >= 0");
    constexpr double kDivergence = 1e6;
    const KernelConfig& config = *a.config();
    const Matrix inputs = generate_raw_inputs(config.k, rows, derive_seed(seed, 1), derive_seed(seed, 3));
    Rng noise(seed, 2);

    RawTable table;
    for (std::size_t i = 0; i < config.n; ++i) table.columns.push_back("x" + std::to_string(i));
    for (std::size_t i = 0; i < config.k; ++i) table.columns.push_back("u" + std::to_string(i));
    table.values = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(config.n + config.k));
    table.values.block(0, static_cast<Eigen::Index>(config.n), static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(config.k)) = inputs.transpose();

    Vector x = Vector::Zero(static_cast<Eigen::Index>(config.n));
    Vector features(static_cast<Eigen::Index>(config.p()));
    Vector next(static_cast<Eigen::Index>(config.n));
    for (std::size_t t = 0; t < rows; ++t) {
        table.timestamps.push_back(static_cast<std::int64_t>(t));
        table.values.row(static_cast<Eigen::Index>(t)).head(static_cast<Eigen::Index>(config.n)) = x.transpose();
        if (t + 1 == rows) break;
        featurize_into({x.data(), config.n}, {inputs.data() + t * config.k, config.k}, config,
                       {features.data(), config.p()});
        a.apply({features.data(), config.p()}, {next.data(), config.n});
        for (Eigen::Index i = 0; i < next.size(); ++i) next(i) += noise_scale * noise.normal();
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergence) {
            throw NumericalFailure("simulated trajectory diverged at hour " + std::to_string(t + 1));
        }
        x = next;
    }
    return table;
}

}  // namespace bayesfault
