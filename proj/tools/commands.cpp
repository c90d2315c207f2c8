#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bayesfault/bayes.hpp"
#include "bayesfault/config.hpp"
#include "bayesfault/data_pipeline.hpp"
#include "bayesfault/errors.hpp"
#include "bayesfault/estimation.hpp"
#include "bayesfault/experiments.hpp"
#include "bayesfault/matrix_io.hpp"
#include "bayesfault/random.hpp"

namespace bayesfault::cli {
namespace {

// Config keys are flag names with '-' replaced by '_'.
std::string config_key(std::string flag) {
    std::replace(flag.begin(), flag.end(), '-', '_');
    return flag;
}

void from_config(const Config& c, const std::string& k, double& v) { v = c.get_double(k, v); }
void from_config(const Config& c, const std::string& k, std::size_t& v) { v = c.get_size(k, v); }
void from_config(const Config& c, const std::string& k, std::string& v) { v = c.get_string(k, v); }
void from_config(const Config& c, const std::string& k, std::vector<std::size_t>& v) { v = c.get_sizes(k, v); }
void from_config(const Config& c, const std::string& k, std::vector<std::string>& v) { v = c.get_strings(k, v); }

/// Registers flags whose defaults come from the config file, so the
/// precedence is flag > config > built-in default.
class Flags {
public:
    Flags(CLI::App* app, const Config& config) : app_(app), config_(config) {}

    template <typename T>
    CLI::Option* add(const std::string& flag, T& target, const std::string& help) {
        from_config(config_, config_key(flag), target);
        CLI::Option* opt = app_->add_option("--" + flag, target, help)->capture_default_str();
        if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<std::string>>) {
            opt->delimiter(',');
        }
        return opt;
    }

private:
    CLI::App* app_;
    const Config& config_;
};

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void add_common(Flags& flags, Common& common, const std::string& config_path) {
    flags.add("seed", common.seed, "random seed");
    flags.add("out", common.out, "output file ('-' for stdout)");
    common.config = config_path;
    flags.add("config", common.config, "key=value configuration file");
}

template <typename Writer>
void write_output(const std::string& path, std::ostream& out, Writer&& writer) {
    if (path.empty()) throw InvalidInput("--out is required");
    if (path == "-") {
        writer(out);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InvalidInput("cannot open '" + path + "' for writing");
    writer(file);
    if (!file) throw Error("failed writing '" + path + "'");
}

void add_scenario(Flags& flags, ScenarioSpec& s) {
    flags.add("n", s.kernel.n, "dependent variables");
    flags.add("k", s.kernel.k, "independent variables");
    flags.add("degree", s.kernel.d, "polynomial degree");
    flags.add("matrix-seed", s.matrix_seed, "seed of the building-1 transition matrix");
    flags.add("matrix-scale", s.matrix_scale, "std. dev. of building-1 matrix entries");
    flags.add("drift", s.drift, "building-2 matrix drift");
    flags.add("fault-sigma", s.fault_sigma, "fault perturbation std. dev.");
    flags.add("source-samples", s.source_samples, "building-1 normal samples");
    flags.add("target-samples", s.target_samples, "building-2 normal samples");
    flags.add("fault-samples", s.fault_samples, "fault samples per building");
    flags.add("noise", s.noise_scale, "observation noise std. dev.");
}

// Dependent columns default to those named x*, independent to the rest.
void resolve_columns(const RawTable& table, std::vector<std::string>& dependent, std::vector<std::string>& independent) {
    if (dependent.empty()) {
        for (const auto& c : table.columns) {
            if (!c.empty() && c[0] == 'x') dependent.push_back(c);
        }
        if (dependent.empty()) throw InvalidInput("no --dependent columns given and none are named x*");
    }
    if (independent.empty()) {
        for (const auto& c : table.columns) {
            if (std::find(dependent.begin(), dependent.end(), c) == dependent.end()) independent.push_back(c);
        }
    }
    for (const auto& c : dependent) table.column_index(c);
    for (const auto& c : independent) table.column_index(c);
}

KernelConfig kernel_for(const std::vector<std::string>& dependent, const std::vector<std::string>& independent,
                        std::size_t degree, std::size_t history) {
    if (history == 0) throw InvalidInput("--history must be >= 1");
    return KernelConfig::make(dependent.size(), (history - 1) * dependent.size() + history * independent.size(),
                              degree);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    // First pass: locate --config so its values can seed the flag defaults.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
    }

    try {
        Config config;
        if (!config_path.empty()) config = Config::load(config_path);

        CLI::App app{"Bayesian fault classification for polynomial state-transition models"};
        app.require_subcommand(1);
        Common common;

        // simulate ------------------------------------------------------
        CLI::App* simulate = app.add_subcommand("simulate", "roll a transition model forward into a CSV table");
        Flags sim_flags(simulate, config);
        add_common(sim_flags, common, config_path);
        std::size_t sim_rows = 500, sim_n = 1, sim_k = 2, sim_degree = 2;
        double sim_scale = 0.2, sim_noise = 0.1;
        std::string sim_matrix, sim_matrix_out;
        sim_flags.add("rows", sim_rows, "rows to generate");
        sim_flags.add("n", sim_n, "dependent variables");
        sim_flags.add("k", sim_k, "independent variables");
        sim_flags.add("degree", sim_degree, "polynomial degree");
        sim_flags.add("matrix-scale", sim_scale, "std. dev. of random matrix entries");
        sim_flags.add("noise", sim_noise, "observation noise std. dev.");
        sim_flags.add("matrix", sim_matrix, "use this matrix file instead of a random one");
        sim_flags.add("matrix-out", sim_matrix_out, "also write the generating matrix here");

        // fit -----------------------------------------------------------
        CLI::App* fit = app.add_subcommand("fit", "fit a transition matrix to CSV data");
        Flags fit_flags(fit, config);
        add_common(fit_flags, common, config_path);
        std::string fit_data, fit_source;
        std::vector<std::string> fit_dep, fit_ind;
        std::size_t fit_degree = 2, fit_history = 1;
        double fit_alpha = 0.0, fit_sw = 0.01, fit_tw = 10.0;
        fit_flags.add("data", fit_data, "training CSV");
        fit_flags.add("dependent", fit_dep, "dependent columns (default: x*)");
        fit_flags.add("independent", fit_ind, "independent columns (default: the rest)");
        fit_flags.add("degree", fit_degree, "polynomial degree");
        fit_flags.add("history", fit_history, "consecutive rows stacked into each sample");
        fit_flags.add("alpha", fit_alpha, "ridge weight");
        fit_flags.add("source", fit_source, "source-building CSV; enables weighted transfer");
        fit_flags.add("source-weight", fit_sw, "weight of source samples");
        fit_flags.add("target-weight", fit_tw, "weight of target samples");

        // classify ------------------------------------------------------
        CLI::App* classify = app.add_subcommand("classify", "window-wise fault decisions for CSV data");
        Flags cls_flags(classify, config);
        add_common(cls_flags, common, config_path);
        std::string cls_matrix, cls_data;
        std::vector<std::string> cls_dep, cls_ind;
        std::size_t cls_history = 1, cls_window = 1;
        cls_flags.add("matrix", cls_matrix, "matrix file written by fit");
        cls_flags.add("data", cls_data, "CSV to classify");
        cls_flags.add("dependent", cls_dep, "dependent columns (default: x*)");
        cls_flags.add("independent", cls_ind, "independent columns (default: the rest)");
        cls_flags.add("history", cls_history, "consecutive rows stacked into each sample");
        cls_flags.add("window", cls_window, "samples summed per decision");

        // mc-f1 ---------------------------------------------------------
        CLI::App* mc = app.add_subcommand("mc-f1", "Monte Carlo F1 versus matrix divergence");
        Flags mc_flags(mc, config);
        add_common(mc_flags, common, config_path);
        McF1Options mc_opts;
        mc_flags.add("trials", mc_opts.trials, "Monte Carlo trials");
        mc_flags.add("samples", mc_opts.samples, "i.i.d. samples per hypothesis");
        mc_flags.add("lags", mc_opts.lags, "window lengths");
        mc_flags.add("sigma", mc_opts.sigma, "perturbation std. dev.");
        mc_flags.add("noise", mc_opts.noise_scale, "observation noise std. dev.");

        // transfer-curve ------------------------------------------------
        CLI::App* tc = app.add_subcommand("transfer-curve", "validation MSE versus target sample count");
        Flags tc_flags(tc, config);
        add_common(tc_flags, common, config_path);
        TransferCurveOptions tc_opts;
        std::string tc_model = "linear";
        add_scenario(tc_flags, tc_opts.scenario);
        tc_flags.add("counts", tc_opts.sample_counts, "target sample counts, ascending");
        tc_flags.add("resamples", tc_opts.resamples, "windows drawn per count");
        tc_flags.add("model", tc_model, "linear or mlp")->check(CLI::IsMember({"linear", "mlp"}));
        tc_flags.add("source-weight", tc_opts.weights.source_weight, "weight of source samples");
        tc_flags.add("target-weight", tc_opts.weights.target_weight, "weight of target samples");
        tc_flags.add("alpha", tc_opts.ridge_alpha, "ridge weight");
        tc_flags.add("learn-rate", tc_opts.target_fit.learn_rate, "MLP learning rate on target windows");
        tc_flags.add("epochs", tc_opts.target_fit.epochs, "MLP epochs on target windows");
        tc_flags.add("batch", tc_opts.target_fit.batch, "MLP batch size on target windows");
        tc_flags.add("source-learn-rate", tc_opts.source_fit.learn_rate, "MLP learning rate for source and baseline");
        tc_flags.add("source-epochs", tc_opts.source_fit.epochs, "MLP epochs for source and baseline");
        tc_flags.add("source-batch", tc_opts.source_fit.batch, "MLP batch size for source and baseline");

        // fault-study ---------------------------------------------------
        CLI::App* fs = app.add_subcommand("fault-study", "logistic fault classifier before and after transfer");
        Flags fs_flags(fs, config);
        add_common(fs_flags, common, config_path);
        FaultStudyOptions fs_opts;
        add_scenario(fs_flags, fs_opts.scenario);
        fs_flags.add("window", fs_opts.window, "samples per classified window");
        fs_flags.add("alpha", fs_opts.ridge_alpha, "ridge weight");
        fs_flags.add("source-weight", fs_opts.weights.source_weight, "weight of source samples");
        fs_flags.add("target-weight", fs_opts.weights.target_weight, "weight of target samples");
        fs_flags.add("learn-rate", fs_opts.learn_rate, "logistic learning rate");
        fs_flags.add("epochs", fs_opts.epochs, "logistic epochs");
        fs_flags.add("transfer-samples", fs_opts.transfer_train_samples, "building-2 samples used for transfer");

        if (const auto unknown = config.unused_keys(); !unknown.empty()) {
            throw InvalidInput("unknown config key '" + unknown.front() + "'");
        }
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? kOk : kUsageError;
        }

        const std::vector<std::string> echo = config.echo();
        auto with_echo = [&](ExperimentResult& r) {
            for (const auto& line : echo) r.metadata.push_back("config." + line);
        };

        if (simulate->parsed()) {
            const TransitionMatrix a =
                sim_matrix.empty()
                    ? random_transition_matrix(KernelConfig::make(sim_n, sim_k, sim_degree), sim_scale,
                                               derive_seed(common.seed, 1))
                    : read_matrix(std::filesystem::path(sim_matrix));
            const RawTable table = simulate_table(a, sim_rows, sim_noise, derive_seed(common.seed, 2));
            if (!sim_matrix_out.empty()) write_matrix(a, std::filesystem::path(sim_matrix_out));
            write_output(common.out, out, [&](std::ostream& o) { write_csv(table, o); });
        } else if (fit->parsed()) {
            if (fit_data.empty()) throw InvalidInput("--data is required");
            const RawTable table = load_csv(fit_data);
            resolve_columns(table, fit_dep, fit_ind);
            const KernelConfig kernel = kernel_for(fit_dep, fit_ind, fit_degree, fit_history);
            const Dataset target = build_dataset(table, fit_dep, fit_ind, kernel, fit_history);
            const FitConfig fc = FitConfig::make(fit_alpha, kernel);
            TransitionMatrix a = fit_source.empty()
                                     ? fit_ls(target, fc)
                                     : fit_wls(build_dataset(load_csv(fit_source), fit_dep, fit_ind, kernel, fit_history),
                                               target, WlsWeights::make(fit_sw, fit_tw), fc);
            write_output(common.out, out, [&](std::ostream& o) { write_matrix(a, o); });
        } else if (classify->parsed()) {
            if (cls_matrix.empty() || cls_data.empty()) throw InvalidInput("--matrix and --data are required");
            const TransitionMatrix a = read_matrix(std::filesystem::path(cls_matrix));
            if (!a.config()) throw InvalidInput("matrix file carries no kernel dimensions (n, k, d)");
            const RawTable table = load_csv(cls_data);
            resolve_columns(table, cls_dep, cls_ind);
            const KernelConfig data_kernel = kernel_for(cls_dep, cls_ind, a.config()->d, cls_history);
            if (!(data_kernel == *a.config()) || a.rows() != data_kernel.n || a.cols() != data_kernel.p()) {
                throw InvalidInput("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                   " (n=" + std::to_string(a.config()->n) + ", k=" + std::to_string(a.config()->k) +
                                   ") but the data gives n=" + std::to_string(data_kernel.n) +
                                   ", k=" + std::to_string(data_kernel.k) + " (p=" +
                                   std::to_string(data_kernel.p()) + ")");
            }
            if (cls_window == 0) throw InvalidInput("--window must be >= 1");
            const Dataset data = build_dataset(table, cls_dep, cls_ind, data_kernel, cls_history);
            const std::vector<LogLikRatio> ratios = classify_windows(data, a, cls_window);
            write_output(common.out, out, [&](std::ostream& o) {
                o << "window,first_timestamp,last_timestamp,log_ratio,decision\n";
                for (std::size_t w = 0; w < ratios.size(); ++w) {
                    o << w << ',' << data.timestamps()[w * cls_window] << ','
                      << data.timestamps()[(w + 1) * cls_window - 1] << ',' << format_number(ratios[w].value) << ','
                      << (ratios[w].decision == Label::Fault ? "fault" : "normal") << '\n';
                }
            });
        } else if (mc->parsed()) {
            mc_opts.seed = common.seed;
            ExperimentResult r = run_mc_f1(mc_opts);
            with_echo(r);
            write_output(common.out, out, [&](std::ostream& o) { r.write_csv(o); });
        } else if (tc->parsed()) {
            tc_opts.seed = common.seed;
            tc_opts.model = tc_model == "mlp" ? TransferModel::Mlp : TransferModel::Linear;
            ExperimentResult r = run_transfer_curve(tc_opts);
            with_echo(r);
            write_output(common.out, out, [&](std::ostream& o) { r.write_csv(o); });
        } else if (fs->parsed()) {
            fs_opts.seed = common.seed;
            ExperimentResult r = run_fault_study(fs_opts);
            with_echo(r);
            write_output(common.out, out, [&](std::ostream& o) { r.write_csv(o); });
        }
        return kOk;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace bayesfault::cli
