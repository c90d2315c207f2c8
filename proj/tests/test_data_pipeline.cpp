#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bayesfault/data_pipeline.hpp"
#include "bayesfault/errors.hpp"
#include "bayesfault/estimation.hpp"
#include "bayesfault/random.hpp"

namespace bf = bayesfault;

namespace {

bf::RawTable parse(const std::string& text) {
    std::istringstream in(text);
    return bf::parse_csv(in);
}

template <typename F>
bf::ParseError capture_parse_error(F&& f) {
    try {
        f();
    } catch (const bf::ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a ParseError";
    return bf::ParseError("none");
}

bf::RawTable small_table() {
    return parse(
        "timestamp,a,b\n"
        "10,0,7\n"
        "11,5,7\n"
        "12,10,7\n");
}

}  // namespace

TEST(Csv, ParsesWellFormedFile) {
    const auto t = small_table();
    EXPECT_EQ(t.rows(), 3u);
    EXPECT_EQ(t.columns, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(t.timestamps, (std::vector<std::int64_t>{10, 11, 12}));
    EXPECT_EQ(t.values(1, 0), 5.0);
    EXPECT_EQ(t.column_index("b"), 1u);
    EXPECT_THROW(t.column_index("c"), bf::InvalidInput);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
    const auto e = capture_parse_error([] { parse("timestamp,a,b\n0,1,2\n1,abc,3\n"); });
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
}

TEST(Csv, RejectsRaggedRowsGapsAndBadHeaders) {
    EXPECT_EQ(capture_parse_error([] { parse("timestamp,a\n0,1\n1,2,3\n"); }).row(), 3u);
    EXPECT_EQ(capture_parse_error([] { parse("timestamp,a\n0,1\n2,2\n"); }).row(), 3u);
    EXPECT_EQ(capture_parse_error([] { parse("timestamp,a\n1,1\n0,2\n"); }).row(), 3u);
    EXPECT_EQ(capture_parse_error([] { parse("time,a\n0,1\n"); }).row(), 1u);
    EXPECT_THROW(parse(""), bf::ParseError);
    EXPECT_THROW(parse("timestamp,a\n0,nan\n"), bf::ParseError);
}

TEST(Csv, RoundTripIsExact) {
    bf::RawTable t;
    t.columns = {"x0", "u0"};
    bf::Rng rng(1);
    t.values.resize(20, 2);
    for (int r = 0; r < 20; ++r) {
        t.timestamps.push_back(1000 + r);
        t.values(r, 0) = rng.normal() * 1e-7;
        t.values(r, 1) = rng.normal() * 1e9;
    }
    const auto path = std::filesystem::temp_directory_path() / "bayesfault_roundtrip.csv";
    bf::write_csv(t, path);
    const auto back = bf::load_csv(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(back.timestamps, t.timestamps);
    EXPECT_EQ(back.values, t.values);
}

TEST(Csv, LoadErrorsKeepLocationAndPath) {
    const auto path = std::filesystem::temp_directory_path() / "bayesfault_bad.csv";
    {
        std::ofstream out(path);
        out << "timestamp,a\n0,1\n1,zz\n";
    }
    const auto e = capture_parse_error([&] { bf::load_csv(path); });
    std::filesystem::remove(path);
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), 2u);
    EXPECT_NE(std::string(e.what()).find("bayesfault_bad.csv"), std::string::npos);
    EXPECT_THROW(bf::load_csv("/nonexistent/file.csv"), bf::InvalidInput);
}

TEST(Normalization, MinMaxAndConstantColumns) {
    const auto [norm, params] = bf::normalize(small_table());
    EXPECT_EQ(norm.values(0, 0), 0.0);
    EXPECT_EQ(norm.values(1, 0), 0.5);
    EXPECT_EQ(norm.values(2, 0), 1.0);
    EXPECT_TRUE(params.constant(1));
    EXPECT_FALSE(params.constant(0));
    for (int r = 0; r < 3; ++r) EXPECT_EQ(norm.values(r, 1), 0.0);
}

TEST(Normalization, ValidationUsesTrainingParamsWithoutClipping) {
    const auto params = bf::compute_normalization(small_table());
    const auto valid = parse("timestamp,a,b\n13,12,7\n14,-5,8\n");
    const auto norm = bf::normalize(valid, params);
    EXPECT_DOUBLE_EQ(norm.values(0, 0), 1.2);
    EXPECT_DOUBLE_EQ(norm.values(1, 0), -0.5);
}

TEST(Normalization, InverseRecoversRawValues) {
    bf::RawTable t;
    t.columns = {"p", "q"};
    bf::Rng rng(2);
    t.values.resize(50, 2);
    for (int r = 0; r < 50; ++r) {
        t.timestamps.push_back(r);
        t.values(r, 0) = 100.0 + 20.0 * rng.normal();
        t.values(r, 1) = rng.uniform(-3.0, 3.0);
    }
    const auto [norm, params] = bf::normalize(t);
    const auto back = bf::denormalize(norm, params);
    EXPECT_LE((back.values - t.values).cwiseAbs().maxCoeff(), 1e-12 * 200.0);

    const auto path = std::filesystem::temp_directory_path() / "bayesfault_norm.csv";
    bf::save_normalization(params, path);
    const auto loaded = bf::load_normalization(path);
    std::filesystem::remove(path);
    EXPECT_EQ(loaded.columns, params.columns);
    EXPECT_EQ(loaded.min, params.min);
    EXPECT_EQ(loaded.max, params.max);
}

TEST(TimeEmbedding, UnitCircleCoordinates) {
    auto e = bf::embed_time(0, 0);
    EXPECT_EQ(e[0], 1.0);
    EXPECT_EQ(e[1], 0.0);
    e = bf::embed_time(6, 0);
    EXPECT_NEAR(e[0], 0.0, 1e-12);
    EXPECT_NEAR(e[1], 1.0, 1e-12);
    e = bf::embed_time(12, 0);
    EXPECT_NEAR(e[0], -1.0, 1e-12);
    EXPECT_NEAR(e[1], 0.0, 1e-12);
    e = bf::embed_time(0, 3);
    EXPECT_NEAR(e[2], std::cos(2.0 * std::numbers::pi * 3.0 / 7.0), 1e-15);
    EXPECT_THROW(bf::embed_time(24, 0), bf::InvalidInput);
    EXPECT_THROW(bf::embed_time(0, 7), bf::InvalidInput);

    const auto t = bf::add_time_embedding(parse("timestamp,a\n30,1\n31,2\n"));
    ASSERT_EQ(t.cols(), 5u);
    const auto expected = bf::embed_time(6, 1);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(t.values(0, 1 + i), expected[i]);
}

TEST(Split, CeilRuleAndPartition) {
    bf::RawTable t;
    t.columns = {"a"};
    t.values.resize(11, 1);
    for (int r = 0; r < 11; ++r) {
        t.timestamps.push_back(r);
        t.values(r, 0) = r;
    }
    const auto [train, valid] = bf::split_chronological(t, 0.5);
    EXPECT_EQ(train.rows(), 6u);
    EXPECT_EQ(valid.rows(), 5u);
    EXPECT_EQ(valid.timestamps.front(), 6);
    EXPECT_EQ(bf::split_chronological(t.slice(0, 10), 0.5).first.rows(), 5u);
    EXPECT_THROW(bf::split_chronological(t, 1.0), bf::InvalidInput);
    EXPECT_THROW(bf::split_chronological(t.slice(0, 1), 0.5), bf::InvalidInput);
}

TEST(BuildDataset, PairsConsecutiveRows) {
    const auto t = parse("timestamp,x,u\n0,1,2\n1,3,4\n");
    const auto d = bf::build_dataset(t, {"x"}, {"u"}, bf::KernelConfig::make(1, 1, 1));
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.s(0)[0], 1.0);
    EXPECT_EQ(d.s(0)[1], 2.0);
    EXPECT_EQ(d.s(0)[2], 1.0);
    EXPECT_EQ(d.x(0)[0], 3.0);
    EXPECT_THROW(bf::build_dataset(t, {"x"}, {"missing"}, bf::KernelConfig::make(1, 1, 1)), bf::InvalidInput);
    EXPECT_THROW(bf::build_dataset(t, {"x"}, {"u"}, bf::KernelConfig::make(1, 2, 1)), bf::InvalidInput);
}

TEST(BuildDataset, ShiftingTheTableShiftsThePairs) {
    const auto t = parse("timestamp,x,u\n0,1,9\n1,2,8\n2,3,7\n3,4,6\n");
    const auto config = bf::KernelConfig::make(1, 1, 2);
    const auto full = bf::build_dataset(t, {"x"}, {"u"}, config);
    const auto shifted = bf::build_dataset(t.slice(1, 3), {"x"}, {"u"}, config);
    ASSERT_EQ(shifted.size(), full.size() - 1);
    for (std::size_t i = 0; i < shifted.size(); ++i) {
        EXPECT_EQ(shifted.features().col(static_cast<Eigen::Index>(i)),
                  full.features().col(static_cast<Eigen::Index>(i + 1)));
        EXPECT_EQ(shifted.x(i)[0], full.x(i + 1)[0]);
    }
}

TEST(BuildDataset, HistoryStacksLaggedRows) {
    const auto t = parse("timestamp,x,u\n0,1,10\n1,2,20\n2,3,30\n3,4,40\n");
    const auto raw = bf::build_raw_dataset(t, {"x"}, {"u"}, 2);
    // Pairs start at t = 1: dependent x_1, independent [x_0, u_1, u_0], output x_2.
    ASSERT_EQ(raw.size(), 2u);
    EXPECT_EQ(raw.dependent(0, 0), 2.0);
    EXPECT_EQ(raw.independent(0, 0), 1.0);
    EXPECT_EQ(raw.independent(1, 0), 20.0);
    EXPECT_EQ(raw.independent(2, 0), 10.0);
    EXPECT_EQ(raw.outputs(0, 0), 3.0);
    EXPECT_EQ(raw.timestamps.front(), 1);
    const auto d = bf::build_dataset(t, {"x"}, {"u"}, bf::KernelConfig::make(1, 3, 1), 2);
    EXPECT_EQ(d.feature_dim(), 5u);
}

TEST(BuildDataset, PlantedModelIsRecoveredEndToEnd) {
    const auto config = bf::KernelConfig::make(1, 2, 2);
    const auto a = bf::random_transition_matrix(config, 0.2, 3);
    const auto table = bf::simulate_table(a, 200, 0.0, 4);
    const auto d = bf::build_dataset(table, {"x0"}, {"u0", "u1"}, config);
    const auto fit = bf::fit_ls(d, bf::FitConfig::make(0.0));
    EXPECT_LE((fit.entries() - a.entries()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Scenario, ZeroDriftAndFaultGiveIdenticalMatrices) {
    bf::ScenarioSpec spec;
    spec.drift = 0.0;
    spec.fault_sigma = 0.0;
    spec.source_samples = spec.target_samples = spec.fault_samples = 50;
    const auto sc = bf::generate_scenario(spec, 5);
    EXPECT_EQ(sc.source_matrix.entries(), sc.target_matrix.entries());
    EXPECT_EQ(sc.target_matrix.entries(), sc.target_fault_matrix.entries());
}

TEST(Scenario, DriftHasExpectedFrobeniusNorm) {
    bf::ScenarioSpec spec;
    spec.kernel = bf::KernelConfig::make(3, 6, 1);  // p = 10
    spec.drift = 0.1;
    spec.source_samples = spec.target_samples = spec.fault_samples = 20;
    const auto sc = bf::generate_scenario(spec, 6);
    const double frob = (sc.source_matrix.entries() - sc.target_matrix.entries()).norm();
    // ||0.1 G||_F for a 3x10 standard normal G: mean ~ 0.1 sqrt(30), sd ~ 0.1 / sqrt(2).
    EXPECT_NEAR(frob, 0.1 * std::sqrt(30.0), 4.0 * 0.1 / std::sqrt(2.0));
}

TEST(Scenario, PureFunctionOfSpecAndSeed) {
    bf::ScenarioSpec spec;
    spec.source_samples = 100;
    spec.target_samples = 60;
    spec.fault_samples = 40;
    const auto a = bf::generate_scenario(spec, 7);
    const auto b = bf::generate_scenario(spec, 7);
    const auto c = bf::generate_scenario(spec, 8);
    EXPECT_EQ(a.source.outputs(), b.source.outputs());
    EXPECT_EQ(a.target_fault.features(), b.target_fault.features());
    EXPECT_EQ(a.target_matrix.entries(), b.target_matrix.entries());
    EXPECT_NE(a.target.outputs(), c.target.outputs());
    EXPECT_EQ(a.source.size(), 100u);
    EXPECT_EQ(a.target.size(), 60u);
    EXPECT_EQ(a.target_fault.size(), 40u);
    spec.drift = -1.0;
    EXPECT_THROW(bf::generate_scenario(spec, 1), bf::InvalidInput);
}

TEST(SimulateTable, ReproducibleAndDivergenceIsReported) {
    const auto config = bf::KernelConfig::make(1, 1, 2);
    const auto a = bf::random_transition_matrix(config, 0.2, 9);
    const auto t1 = bf::simulate_table(a, 100, 0.1, 10);
    const auto t2 = bf::simulate_table(a, 100, 0.1, 10);
    EXPECT_EQ(t1.values, t2.values);
    EXPECT_NO_THROW(t1.validate());
    bf::RowMatrix explode(1, 5);
    explode << 5.0, 5.0, 0.0, 0.0, 1.0;
    EXPECT_THROW(bf::simulate_table(bf::TransitionMatrix(explode, config), 100, 0.0, 1), bf::NumericalFailure);
}
