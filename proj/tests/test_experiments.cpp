#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bayesfault/errors.hpp"
#include "bayesfault/experiments.hpp"
#include "bayesfault/metrics.hpp"

namespace bf = bayesfault;

namespace {

std::string csv(const bf::ExperimentResult& r) {
    std::ostringstream out;
    r.write_csv(out);
    return out.str();
}

double mean_of(const std::vector<const bf::ExperimentRow*>& rows) {
    double sum = 0.0;
    for (const auto* r : rows) sum += r->value;
    return rows.empty() ? NAN : sum / static_cast<double>(rows.size());
}

}  // namespace

TEST(ExperimentResult, SortIsNumericAwareAndCsvIsLongForm) {
    bf::ExperimentResult r;
    r.name = "demo";
    r.seed = 3;
    r.param_names = {"count"};
    r.metadata = {"note=x"};
    r.add(1, 9, {"10"}, "mse", 0.5);
    r.add(0, 8, {"9"}, "mse", 0.25);
    r.add(0, 8, {"10"}, "mse", 0.125);
    r.add(0, 8, {"10"}, "a", 1.0);
    r.sort_rows();
    EXPECT_EQ(csv(r),
              "# experiment=demo\n# seed=3\n# note=x\n"
              "trial,seed,count,metric,value\n"
              "0,8,9,mse,0.25\n"
              "0,8,10,a,1\n"
              "0,8,10,mse,0.125\n"
              "1,9,10,mse,0.5\n");
    EXPECT_EQ(r.select("mse", "count", "10").size(), 2u);
    EXPECT_EQ(r.select("mse").size(), 3u);
    EXPECT_THROW(r.add(0, 0, {}, "mse", 0.0), bf::InvalidInput);
    EXPECT_THROW(r.select("mse", "lag", "1"), bf::InvalidInput);
}

TEST(ExperimentResult, FormatNumberRoundTrips) {
    EXPECT_EQ(bf::format_number(0.1), "0.1");
    EXPECT_EQ(bf::format_number(std::size_t{42}), "42");
    const double v = 1.0 / 3.0;
    EXPECT_EQ(std::stod(bf::format_number(v)), v);
}

TEST(Metrics, ConfusionCounts) {
    using bf::Label;
    const std::vector<Label> truth{Label::Fault, Label::Fault, Label::Normal, Label::Normal, Label::Fault};
    const std::vector<Label> pred{Label::Fault, Label::Normal, Label::Fault, Label::Normal, Label::Fault};
    const auto c = bf::confusion(truth, pred);
    EXPECT_EQ(c.true_positive, 2u);
    EXPECT_EQ(c.false_negative, 1u);
    EXPECT_EQ(c.false_positive, 1u);
    EXPECT_EQ(c.true_negative, 1u);
    EXPECT_DOUBLE_EQ(c.precision(), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.recall(), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.f1(), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.accuracy(), 0.6);
    EXPECT_EQ(bf::Confusion{}.f1(), 0.0);
    EXPECT_THROW(bf::confusion(truth, std::span<const Label>(pred).first(2)), bf::InvalidInput);
}

TEST(McF1, DeterministicAndShaped) {
    bf::McF1Options o;
    o.trials = 5;
    o.samples = 100;
    o.seed = 11;
    const auto a = bf::run_mc_f1(o);
    const auto b = bf::run_mc_f1(o);
    EXPECT_EQ(csv(a), csv(b));
    EXPECT_EQ(a.rows.size(), 5u * 3u * 3u);
    for (const auto* r : a.select("f1")) {
        EXPECT_GE(r->value, 0.0);
        EXPECT_LE(r->value, 1.0);
    }
    o.seed = 12;
    EXPECT_NE(csv(bf::run_mc_f1(o)), csv(a));
    o.samples = 5;
    EXPECT_THROW(bf::run_mc_f1(o), bf::InvalidInput);
}

TEST(McF1, IdenticalMatricesGiveChanceLevel) {
    bf::McF1Options o;
    o.trials = 100;
    o.samples = 200;
    o.lags = {1};
    o.sigma = 0.0;
    o.seed = 4;
    const auto r = bf::run_mc_f1(o);
    for (const auto* row : r.select("f1")) EXPECT_EQ(r.param(*row, "frobenius"), "0");
    const double f1 = mean_of(r.select("f1"));
    EXPECT_GE(f1, 0.3);
    EXPECT_LE(f1, 0.7);
}

TEST(McF1, LargeDivergenceIsDetected) {
    bf::McF1Options o;
    o.trials = 10;
    o.samples = 200;
    o.lags = {10};
    o.sigma = 5.0;
    o.seed = 5;
    EXPECT_GE(mean_of(bf::run_mc_f1(o).select("f1")), 0.9);
}

TEST(TransferCurve, ScratchOnWholePoolEqualsBaseline) {
    bf::TransferCurveOptions o;
    o.scenario.source_samples = 400;
    o.scenario.target_samples = 200;
    o.sample_counts = {24, 100};  // pool = 100
    o.resamples = 3;
    o.seed = 2;
    const auto r = bf::run_transfer_curve(o);
    const auto baseline = r.select("mse", "arm", "baseline");
    ASSERT_EQ(baseline.size(), 1u);
    const auto full = r.select("mse", "count", "100");
    for (const auto* row : full) {
        if (r.param(*row, "arm") == "scratch") EXPECT_NEAR(row->value, baseline[0]->value, 1e-10);
    }
    for (const auto* row : r.select("start", "count", "100")) EXPECT_EQ(row->value, 0.0);
    for (const auto* row : r.select("start", "count", "24")) EXPECT_LE(row->value, 76.0);
    EXPECT_EQ(csv(r), csv(bf::run_transfer_curve(o)));

    o.sample_counts = {24, 101};
    EXPECT_THROW(bf::run_transfer_curve(o), bf::InvalidInput);
}

TEST(TransferCurve, SourceDataHelpsWithFewTargetSamples) {
    bf::TransferCurveOptions o;
    o.sample_counts = {24};
    o.resamples = 30;
    o.seed = 3;
    const auto r = bf::run_transfer_curve(o);
    double transfer = 0.0;
    double scratch = 0.0;
    for (const auto* row : r.select("mse", "count", "24")) {
        (r.param(*row, "arm") == "transfer" ? transfer : scratch) += row->value;
    }
    EXPECT_LT(transfer, scratch);
}

TEST(TransferCurve, MlpArmsRunAndAreReproducible) {
    bf::TransferCurveOptions o;
    o.model = bf::TransferModel::Mlp;
    o.scenario.source_samples = 200;
    o.scenario.target_samples = 100;
    o.sample_counts = {24};
    o.resamples = 2;
    o.source_fit.epochs = 5;
    o.target_fit.epochs = 5;
    o.seed = 4;
    const auto r = bf::run_transfer_curve(o);
    EXPECT_EQ(r.select("mse", "arm", "transfer").size(), 2u);
    EXPECT_EQ(r.select("mse", "arm", "scratch").size(), 2u);
    for (const auto* row : r.select("mse")) EXPECT_TRUE(std::isfinite(row->value));
    EXPECT_EQ(csv(r), csv(bf::run_transfer_curve(o)));
}

TEST(FaultStudy, SmallRunIsConsistent) {
    bf::FaultStudyOptions o;
    o.scenario.source_samples = 600;
    o.scenario.target_samples = 636;
    o.scenario.fault_samples = 300;
    o.scenario.noise_scale = 0.1;
    o.scenario.drift = 0.05;
    o.transfer_train_samples = 336;
    o.epochs = 2000;
    o.seed = 1;
    const auto r = bf::run_fault_study(o);
    for (const std::string phase : {"source", "transfer"}) {
        std::size_t validation = 0;
        std::size_t decisions = 0;
        std::vector<bf::Label> truth;
        std::vector<bf::Label> predicted;
        for (const auto* row : r.select("validation_windows", "phase", phase)) {
            validation = static_cast<std::size_t>(row->value);
        }
        for (const auto* row : r.select("decision", "phase", phase)) {
            ++decisions;
            predicted.push_back(row->value > 0 ? bf::Label::Fault : bf::Label::Normal);
        }
        for (const auto* row : r.select("truth", "phase", phase)) {
            truth.push_back(row->value > 0 ? bf::Label::Fault : bf::Label::Normal);
        }
        EXPECT_EQ(decisions, validation);
        // 30 windows per class, 15 train and 15 validation each.
        EXPECT_EQ(validation, 30u);
        const auto c = bf::confusion(truth, predicted);
        const auto f1 = r.select("f1", "phase", phase);
        ASSERT_EQ(f1.size(), 1u);
        EXPECT_DOUBLE_EQ(f1[0]->value, c.f1());
    }
    o.transfer_train_samples = 636;
    EXPECT_THROW(bf::run_fault_study(o), bf::InvalidInput);
}
