#include <gtest/gtest.h>

#include <cmath>

#include "bayesfault/errors.hpp"
#include "bayesfault/kernel_model.hpp"
#include "bayesfault/random.hpp"

namespace bf = bayesfault;

TEST(KernelConfig, FeatureCountAndNames) {
    const auto c = bf::KernelConfig::make(2, 1, 3);
    EXPECT_EQ(c.p(), 3u * (2 + 1) + 1);
    const std::vector<std::string> expected{"x0^3", "x1^3", "x0^2", "x1^2", "x0^1", "x1^1",
                                            "u0^3", "u0^2", "u0^1", "const"};
    EXPECT_EQ(c.feature_names(), expected);
    EXPECT_THROW(bf::KernelConfig::make(0, 1, 1), bf::InvalidInput);
    EXPECT_THROW(bf::KernelConfig::make(1, 1, 0), bf::InvalidInput);
    EXPECT_EQ(bf::KernelConfig::make(1, 0, 1).p(), 2u);
}

TEST(Featurize, PowerMajorLayoutWithExactSigns) {
    const auto c = bf::KernelConfig::make(2, 1, 2);
    const std::vector<double> x{-2.0, 3.0};
    const std::vector<double> u{-0.5};
    const bf::Vector s = bf::featurize(x, u, c);
    const std::vector<double> expected{4.0, 9.0, -2.0, 3.0, 0.25, -0.5, 1.0};
    ASSERT_EQ(static_cast<std::size_t>(s.size()), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(s(static_cast<Eigen::Index>(i)), expected[i]);

    const auto cubic = bf::KernelConfig::make(1, 0, 3);
    const std::vector<double> neg{-1.5};
    const bf::Vector t = bf::featurize(neg, {}, cubic);
    EXPECT_EQ(t(0), -1.5 * -1.5 * -1.5);
    EXPECT_LT(t(0), 0.0);
}

TEST(Featurize, RejectsWrongSizes) {
    const auto c = bf::KernelConfig::make(2, 1, 2);
    const std::vector<double> x{1.0};
    const std::vector<double> u{1.0};
    EXPECT_THROW(bf::featurize(x, u, c), bf::InvalidInput);
}

TEST(TransitionMatrix, ShapeChecksAndApply) {
    const auto c = bf::KernelConfig::make(1, 1, 1);
    bf::RowMatrix e(1, 3);
    e << 0.5, -1.0, 2.0;
    const bf::TransitionMatrix a(e, c);
    const std::vector<double> s{2.0, 3.0, 1.0};
    EXPECT_DOUBLE_EQ(a.apply(s)(0), 0.5 * 2.0 - 3.0 + 2.0);
    EXPECT_DOUBLE_EQ(a.frobenius_squared(), 0.25 + 1.0 + 4.0);

    bf::RowMatrix wrong(2, 3);
    wrong.setZero();
    EXPECT_THROW(bf::TransitionMatrix(wrong, c), bf::InvalidInput);
    const std::vector<double> short_s{1.0, 1.0};
    EXPECT_THROW(a.apply(short_s), bf::InvalidInput);
    EXPECT_EQ(bf::TransitionMatrix::zeros(c).frobenius_squared(), 0.0);
}

TEST(Dataset, ValidatesConstantFeatureAndShapes) {
    const auto c = bf::KernelConfig::make(1, 0, 1);
    bf::Matrix s(2, 3);
    s << 1, 2, 3, 1, 1, 1;
    bf::Matrix x(1, 3);
    x << 1, 2, 3;
    EXPECT_NO_THROW(bf::Dataset(s, x, {}, c));
    bf::Matrix bad = s;
    bad(1, 2) = 0.5;
    EXPECT_THROW(bf::Dataset(bad, x, {}, c), bf::InvalidInput);
    EXPECT_THROW(bf::Dataset(s, bf::Matrix(1, 2), {}, c), bf::InvalidInput);
    bf::Matrix nan = x;
    nan(0, 1) = std::nan("");
    EXPECT_THROW(bf::Dataset(s, nan), bf::InvalidInput);
}

TEST(Dataset, SliceAndConcatRoundTrip) {
    bf::Matrix s = bf::Matrix::Random(3, 10);
    bf::Matrix x = bf::Matrix::Random(2, 10);
    std::vector<std::int64_t> ts(10);
    for (int i = 0; i < 10; ++i) ts[i] = 100 + i;
    const bf::Dataset d(s, x, ts);
    const bf::Dataset head = d.slice(0, 4);
    const bf::Dataset tail = d.slice(4, 6);
    EXPECT_EQ(head.size(), 4u);
    EXPECT_EQ(tail.timestamps().front(), 104);
    const bf::Dataset joined = bf::Dataset::concat(head, tail);
    EXPECT_EQ(joined.features(), d.features());
    EXPECT_EQ(joined.outputs(), d.outputs());
    EXPECT_EQ(joined.timestamps(), d.timestamps());
    EXPECT_THROW(d.slice(8, 3), bf::InvalidInput);
    EXPECT_EQ(d.x(3)[1], x(1, 3));
    EXPECT_EQ(d.s(3)[2], s(2, 3));
}

TEST(Simulate, NoiselessOutputsEqualMatrixProduct) {
    bf::RowMatrix e = bf::RowMatrix::Random(2, 4);
    const bf::TransitionMatrix a(e);
    const bf::Matrix inputs = bf::Matrix::Random(4, 25);
    const bf::Dataset d = bf::simulate(a, inputs, 0.0, 1);
    const bf::Matrix expected = e * inputs;
    EXPECT_LE((d.outputs() - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Simulate, NoiseIsSeededAndUnitScale) {
    bf::RowMatrix e = bf::RowMatrix::Zero(1, 2);
    const bf::TransitionMatrix a(e);
    const bf::Matrix inputs = bf::Matrix::Ones(2, 20000);
    const bf::Dataset d1 = bf::simulate(a, inputs, 2.0, 42);
    const bf::Dataset d2 = bf::simulate(a, inputs, 2.0, 42);
    const bf::Dataset d3 = bf::simulate(a, inputs, 2.0, 43);
    EXPECT_EQ(d1.outputs(), d2.outputs());
    EXPECT_NE(d1.outputs(), d3.outputs());
    const double mean = d1.outputs().mean();
    const double var = (d1.outputs().array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 0.05);
    EXPECT_NEAR(var, 4.0, 0.15);
    EXPECT_THROW(bf::simulate(a, bf::Matrix::Ones(3, 2), 1.0, 0), bf::InvalidInput);
}

TEST(PerturbMatrix, ZeroSigmaIsExactCopyAndNoiseHasRequestedScale) {
    bf::RowMatrix e = bf::RowMatrix::Random(40, 50);
    const bf::TransitionMatrix a(e);
    EXPECT_EQ(bf::perturb_matrix(a, 0.0, 9).entries(), e);
    const bf::TransitionMatrix b = bf::perturb_matrix(a, 0.5, 9);
    const bf::RowMatrix diff = b.entries() - e;
    const double var = diff.array().square().mean();
    EXPECT_NEAR(var, 0.25, 0.02);
    EXPECT_EQ(bf::perturb_matrix(a, 0.5, 9).entries(), b.entries());
    EXPECT_THROW(bf::perturb_matrix(a, -1.0, 9), bf::InvalidInput);
}

TEST(Random, DerivedSeedsAreDistinctAndStable) {
    EXPECT_EQ(bf::derive_seed(5, 1), bf::derive_seed(5, 1));
    EXPECT_NE(bf::derive_seed(5, 1), bf::derive_seed(5, 2));
    EXPECT_NE(bf::derive_seed(5, 1), bf::derive_seed(6, 1));
    bf::Rng a(3, 4);
    bf::Rng b(3, 4);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
    bf::Rng c(1);
    for (int i = 0; i < 1000; ++i) EXPECT_LT(c.index(7), 7u);
}
