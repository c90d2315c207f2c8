#include "bayesfault/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "bayesfault/bayes.hpp"
#include "bayesfault/errors.hpp"
#include "bayesfault/metrics.hpp"
#include "bayesfault/random.hpp"

namespace bayesfault {

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string format_number(std::size_t value) { return std::to_string(value); }

void ExperimentResult::add(std::size_t trial, std::uint64_t row_seed, std::vector<std::string> params,
                           std::string metric, double value) {
    if (params.size() != param_names.size()) {
        throw InvalidInput("experiment row has " + std::to_string(params.size()) + " parameters, expected " +
                           std::to_string(param_names.size()));
    }
    rows.push_back({trial, row_seed, std::move(params), std::move(metric), value});
}

namespace {

// Numeric parameters compare by value so that "10" sorts after "9".
int compare_param(const std::string& a, const std::string& b) {
    double x = 0.0;
    double y = 0.0;
    const auto xr = std::from_chars(a.data(), a.data() + a.size(), x);
    const auto yr = std::from_chars(b.data(), b.data() + b.size(), y);
    const bool numeric = xr.ec == std::errc() && xr.ptr == a.data() + a.size() && yr.ec == std::errc() &&
                         yr.ptr == b.data() + b.size();
    if (numeric && x != y) return x < y ? -1 : 1;
    return a.compare(b);
}

}  // namespace

void ExperimentResult::sort_rows() {
    std::stable_sort(rows.begin(), rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        if (a.trial != b.trial) return a.trial < b.trial;
        for (std::size_t i = 0; i < a.params.size(); ++i) {
            if (const int c = compare_param(a.params[i], b.params[i]); c != 0) return c < 0;
        }
        return a.metric < b.metric;
    });
}

std::vector<const ExperimentRow*> ExperimentResult::select(const std::string& metric, const std::string& param,
                                                           const std::string& value) const {
    std::size_t column = param_names.size();
    if (!param.empty()) {
        const auto it = std::find(param_names.begin(), param_names.end(), param);
        if (it == param_names.end()) throw InvalidInput("experiment has no parameter '" + param + "'");
        column = static_cast<std::size_t>(it - param_names.begin());
    }
    std::vector<const ExperimentRow*> out;
    for (const auto& row : rows) {
        if (row.metric != metric) continue;
        if (column < param_names.size() && row.params[column] != value) continue;
        out.push_back(&row);
    }
    return out;
}

const std::string& ExperimentResult::param(const ExperimentRow& row, const std::string& name) const {
    const auto it = std::find(param_names.begin(), param_names.end(), name);
    if (it == param_names.end()) throw InvalidInput("experiment has no parameter '" + name + "'");
    return row.params.at(static_cast<std::size_t>(it - param_names.begin()));
}

void ExperimentResult::write_csv(std::ostream& out) const {
    out << "# experiment=" << name << '\n';
    out << "# seed=" << seed << '\n';
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "trial,seed";
    for (const auto& p : param_names) out << ',' << p;
    out << ",metric,value\n";
    for (const auto& row : rows) {
        out << row.trial << ',' << row.seed;
        for (const auto& p : row.params) out << ',' << p;
        out << ',' << row.metric << ',' << format_number(row.value) << '\n';
    }
}

void ExperimentResult::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
    write_csv(out);
}

namespace {

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("split fraction must lie in (0, 1)");
    const auto head = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(data.size())));
    if (head == 0 || head >= data.size()) {
        throw InvalidInput("split fraction leaves an empty partition of " + std::to_string(data.size()) + " samples");
    }
    return {data.slice(0, head), data.slice(head, data.size() - head)};
}

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ";" : "") + std::to_string(values[i]);
    return out;
}

std::vector<std::string> scenario_metadata(const ScenarioSpec& s) {
    return {"n=" + format_number(s.kernel.n),
            "k=" + format_number(s.kernel.k),
            "d=" + format_number(s.kernel.d),
            "matrix_seed=" + std::to_string(s.matrix_seed),
            "matrix_scale=" + format_number(s.matrix_scale),
            "drift=" + format_number(s.drift),
            "fault_sigma=" + format_number(s.fault_sigma),
            "source_samples=" + format_number(s.source_samples),
            "target_samples=" + format_number(s.target_samples),
            "fault_samples=" + format_number(s.fault_samples),
            "noise_scale=" + format_number(s.noise_scale)};
}

}  // namespace

// ---------------------------------------------------------------------------

TransitionMatrix mc_reference_matrix() {
    RowMatrix a(2, 2);
    a << 0.9, 0.0, 0.0, -0.4;
    return TransitionMatrix(std::move(a));
}

void McF1Options::validate() const {
    if (trials == 0) throw InvalidInput("mc-f1: trials must be >= 1");
    if (lags.empty()) throw InvalidInput("mc-f1: at least one lag is required");
    for (std::size_t lag : lags) {
        if (lag == 0) throw InvalidInput("mc-f1: lags must be >= 1");
        if (lag > samples) {
            throw InvalidInput("mc-f1: samples (" + std::to_string(samples) + ") must be >= every lag (" +
                               std::to_string(lag) + ")");
        }
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("mc-f1: sigma must be finite and >= 0");
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw InvalidInput("mc-f1: noise must be >= 0");
}

ExperimentResult run_mc_f1(const McF1Options& options) {
    options.validate();
    const TransitionMatrix a = mc_reference_matrix();
    const auto dim = static_cast<Eigen::Index>(a.cols());
    const auto count = static_cast<Eigen::Index>(options.samples);

    ExperimentResult result;
    result.name = "mc-f1";
    result.seed = options.seed;
    result.param_names = {"lag", "frobenius"};
    result.metadata = {"trials=" + format_number(options.trials), "samples=" + format_number(options.samples),
                       "lags=" + join(options.lags), "sigma=" + format_number(options.sigma),
                       "noise_scale=" + format_number(options.noise_scale),
                       "windows=non-overlapping", "positive_class=fault",
                       "trial_seed=derive_seed(seed, trial)"};

    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        const std::uint64_t trial_seed = derive_seed(options.seed, trial);
        const TransitionMatrix b = perturb_matrix(a, options.sigma, derive_seed(trial_seed, 1));
        const double frobenius = (a.entries() - b.entries()).norm();

        auto draw_inputs = [&](std::uint64_t stream) {
            Rng rng(trial_seed, stream);
            Matrix s(dim, count);
            for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
            return s;
        };
        const Dataset normal = simulate(a, draw_inputs(2), options.noise_scale, derive_seed(trial_seed, 4));
        const Dataset fault = simulate(b, draw_inputs(3), options.noise_scale, derive_seed(trial_seed, 5));

        for (std::size_t lag : options.lags) {
            Confusion c;
            const std::size_t windows = options.samples / lag;
            for (std::size_t w = 0; w < windows; ++w) {
                c.add(Label::Normal, classify_sequence(normal.slice(w * lag, lag), a).decision);
                c.add(Label::Fault, classify_sequence(fault.slice(w * lag, lag), a).decision);
            }
            std::vector<std::string> params{format_number(lag), format_number(frobenius)};
            result.add(trial, trial_seed, params, "f1", c.f1());
            result.add(trial, trial_seed, params, "precision", c.precision());
            result.add(trial, trial_seed, std::move(params), "recall", c.recall());
        }
    }
    result.sort_rows();
    return result;
}

// ---------------------------------------------------------------------------

void TransferCurveOptions::validate() const {
    scenario.validate();
    if (sample_counts.empty()) throw InvalidInput("transfer-curve: at least one sample count is required");
    if (!std::is_sorted(sample_counts.begin(), sample_counts.end())) {
        throw InvalidInput("transfer-curve: sample counts must be sorted ascending");
    }
    if (sample_counts.front() == 0) throw InvalidInput("transfer-curve: sample counts must be >= 1");
    if (resamples == 0) throw InvalidInput("transfer-curve: resamples must be >= 1");
    WlsWeights::make(weights.source_weight, weights.target_weight);
    if (!(ridge_alpha >= 0.0)) throw InvalidInput("transfer-curve: ridge alpha must be >= 0");
}

ExperimentResult run_transfer_curve(const TransferCurveOptions& options) {
    options.validate();
    const Scenario scenario = generate_scenario(options.scenario, options.seed);
    const auto [source_train, source_rest] = split_dataset(scenario.source, options.target_train_fraction);
    const auto [pool, validation] = split_dataset(scenario.target, options.target_train_fraction);
    if (options.sample_counts.back() > pool.size()) {
        throw InvalidInput("transfer-curve: sample count " + std::to_string(options.sample_counts.back()) +
                           " exceeds the target training pool of " + std::to_string(pool.size()));
    }
    const bool linear = options.model == TransferModel::Linear;
    const FitConfig fit_config = FitConfig::make(options.ridge_alpha);
    // Scratch and baseline minimize the transfer objective with the source
    // term dropped: w_t ||W S - X||^2 + alpha ||W||^2, i.e. ridge alpha / w_t.
    const FitConfig scratch_config = FitConfig::make(options.ridge_alpha / options.weights.target_weight);
    const std::size_t p = pool.feature_dim();
    const std::size_t n = pool.output_dim();

    ExperimentResult result;
    result.name = "transfer-curve";
    result.seed = options.seed;
    result.param_names = {"count", "arm"};
    result.metadata = scenario_metadata(options.scenario);
    result.metadata.insert(result.metadata.end(),
                           {"model=" + std::string(linear ? "linear" : "mlp"),
                            "sample_counts=" + join(options.sample_counts),
                            "resamples=" + format_number(options.resamples),
                            "source_weight=" + format_number(options.weights.source_weight),
                            "target_weight=" + format_number(options.weights.target_weight),
                            "ridge_alpha=" + format_number(options.ridge_alpha),
                            "scratch_ridge_alpha=" + format_number(options.ridge_alpha / options.weights.target_weight),
                            "pool_samples=" + format_number(pool.size()),
                            "validation_samples=" + format_number(validation.size()),
                            "resample_seed=derive_seed(derive_seed(seed, 100 + count), trial)"});
    if (!linear) {
        for (const auto& [label, fit] : {std::pair{"source", options.source_fit}, std::pair{"target", options.target_fit}}) {
            result.metadata.push_back(std::string(label) + "_learn_rate=" + format_number(fit.learn_rate));
            result.metadata.push_back(std::string(label) + "_epochs=" + format_number(fit.epochs));
            result.metadata.push_back(std::string(label) + "_batch=" + format_number(fit.batch));
        }
    }

    MlpModel source_model;
    const std::uint64_t init_seed = derive_seed(options.seed, 30);
    if (linear) {
        result.add(0, options.seed, {format_number(pool.size()), "baseline"}, "mse",
                   mse(fit_ls(pool, scratch_config), validation));
    } else {
        MlpFitOptions fit = options.source_fit;
        fit.seed = derive_seed(options.seed, 31);
        source_model = mlp_fit(source_train, mlp_init(p, n, init_seed), fit);
        fit.seed = derive_seed(options.seed, 32);
        result.add(0, options.seed, {format_number(pool.size()), "baseline"}, "mse",
                   mlp_loss(mlp_fit(pool, mlp_init(p, n, init_seed), fit), validation));
    }

    for (std::size_t count : options.sample_counts) {
        const std::uint64_t count_seed = derive_seed(options.seed, 100 + count);
        for (std::size_t trial = 0; trial < options.resamples; ++trial) {
            const std::uint64_t rs = derive_seed(count_seed, trial);
            Rng rng(rs);
            const std::size_t start = rng.index(pool.size() - count + 1);
            const Dataset window = pool.slice(start, count);
            const std::string c = format_number(count);
            if (linear) {
                result.add(trial, rs, {c, "transfer"}, "mse",
                           mse(fit_wls(source_train, window, options.weights, fit_config), validation));
                result.add(trial, rs, {c, "scratch"}, "mse", mse(fit_ls(window, scratch_config), validation));
            } else {
                MlpFitOptions fit = options.target_fit;
                fit.seed = derive_seed(rs, 1);
                result.add(trial, rs, {c, "transfer"}, "mse", mlp_loss(mlp_fit(window, source_model, fit), validation));
                result.add(trial, rs, {c, "scratch"}, "mse",
                           mlp_loss(mlp_fit(window, mlp_init(p, n, derive_seed(rs, 2)), fit), validation));
            }
            result.add(trial, rs, {c, "window"}, "start", static_cast<double>(start));
        }
    }
    result.sort_rows();
    return result;
}

// ---------------------------------------------------------------------------

void FaultStudyOptions::validate() const {
    scenario.validate();
    if (window == 0) throw InvalidInput("fault-study: window must be >= 1");
    if (!(ridge_alpha >= 0.0)) throw InvalidInput("fault-study: ridge alpha must be >= 0");
    WlsWeights::make(weights.source_weight, weights.target_weight);
    if (transfer_train_samples == 0 || transfer_train_samples >= scenario.target_samples) {
        throw InvalidInput("fault-study: transfer_train_samples must lie in [1, target_samples)");
    }
}

namespace {

struct PhaseInput {
    std::string name;
    TransitionMatrix estimate;
    Dataset normal;  // held-out normal operation
    Dataset fault;
};

void run_phase(const PhaseInput& phase, const FaultStudyOptions& options, std::uint64_t seed,
               ExperimentResult& result) {
    std::vector<ClassifierFeatures> normal = window_features(phase.normal, phase.estimate, options.window);
    std::vector<ClassifierFeatures> fault = window_features(phase.fault, phase.estimate, options.window);
    const std::size_t m = std::min(normal.size(), fault.size());
    const auto train = static_cast<std::size_t>(std::ceil(options.classifier_train_fraction * static_cast<double>(m)));
    if (m < 2 || train == 0 || train >= m) {
        throw InvalidInput("fault-study (" + phase.name + "): only " + std::to_string(m) +
                           " windows per class; need more samples or a shorter window");
    }
    normal.resize(m);
    fault.resize(m);

    std::vector<ClassifierFeatures> train_features(normal.begin(), normal.begin() + static_cast<std::ptrdiff_t>(train));
    train_features.insert(train_features.end(), fault.begin(), fault.begin() + static_cast<std::ptrdiff_t>(train));
    std::vector<Label> train_labels(train, Label::Normal);
    train_labels.resize(2 * train, Label::Fault);
    const LogisticModel model = train_logistic(train_features, train_labels, options.learn_rate, options.epochs, seed);

    // Validation trace: held-out normal windows, then held-out fault windows.
    Confusion c;
    std::size_t index = 0;
    auto score = [&](const std::vector<ClassifierFeatures>& windows, Label truth) {
        for (std::size_t w = train; w < m; ++w, ++index) {
            const LogisticPrediction pred = predict_logistic(model, windows[w]);
            c.add(truth, pred.label);
            const std::string idx = format_number(index);
            result.add(0, seed, {phase.name, idx}, "decision", pred.label == Label::Fault ? 1.0 : -1.0);
            result.add(0, seed, {phase.name, idx}, "probability", pred.probability);
            result.add(0, seed, {phase.name, idx}, "truth", truth == Label::Fault ? 1.0 : -1.0);
        }
    };
    score(normal, Label::Normal);
    score(fault, Label::Fault);

    const std::vector<std::string> all{phase.name, "all"};
    result.add(0, seed, all, "precision", c.precision());
    result.add(0, seed, all, "recall", c.recall());
    result.add(0, seed, all, "f1", c.f1());
    result.add(0, seed, all, "train_windows", static_cast<double>(2 * train));
    result.add(0, seed, all, "validation_windows", static_cast<double>(c.total()));
    result.add(0, seed, all, "normal_mse", mse(phase.estimate, phase.normal));
    result.add(0, seed, all, "train_loss", model.final_loss);
}

}  // namespace

ExperimentResult run_fault_study(const FaultStudyOptions& options) {
    options.validate();
    const Scenario scenario = generate_scenario(options.scenario, options.seed);
    const FitConfig fit_config = FitConfig::make(options.ridge_alpha);

    ExperimentResult result;
    result.name = "fault-study";
    result.seed = options.seed;
    result.param_names = {"phase", "window"};
    result.metadata = scenario_metadata(options.scenario);
    result.metadata.insert(result.metadata.end(),
                           {"window=" + format_number(options.window), "ridge_alpha=" + format_number(options.ridge_alpha),
                            "source_weight=" + format_number(options.weights.source_weight),
                            "target_weight=" + format_number(options.weights.target_weight),
                            "learn_rate=" + format_number(options.learn_rate),
                            "epochs=" + format_number(options.epochs),
                            "source_fit_fraction=" + format_number(options.source_fit_fraction),
                            "transfer_train_samples=" + format_number(options.transfer_train_samples),
                            "classifier_train_fraction=" + format_number(options.classifier_train_fraction),
                            "trace=per non-overlapping window; held-out normal windows then held-out fault windows",
                            "decision=+1 fault, -1 normal"});

    const auto [source_fit, source_held] = split_dataset(scenario.source, options.source_fit_fraction);
    const TransitionMatrix source_estimate = fit_ls(source_fit, fit_config);
    run_phase({"source", source_estimate, source_held, scenario.source_fault}, options,
              derive_seed(options.seed, 40), result);

    const Dataset target_fit = scenario.target.slice(0, options.transfer_train_samples);
    const Dataset target_held =
        scenario.target.slice(options.transfer_train_samples, scenario.target.size() - options.transfer_train_samples);
    const TransitionMatrix target_estimate = fit_wls(source_fit, target_fit, options.weights, fit_config);
    run_phase({"transfer", target_estimate, target_held, scenario.target_fault}, options,
              derive_seed(options.seed, 41), result);

    result.sort_rows();
    return result;
}

}  // namespace bayesfault
