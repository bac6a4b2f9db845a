#include "grownet/grownet.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grownet;

TEST(Topology, ParamCountExamples) {
    EXPECT_EQ(param_count(build_topology({2, 3, 1})), 13u);
    EXPECT_EQ(param_count(build_topology({1, 1, 1})), 4u);
    EXPECT_EQ(param_count(build_topology({4, 100, 1})), 601u);
    EXPECT_EQ(param_count(build_topology({1, 1})), 2u);
}

TEST(Topology, Construction) {
    const Topology t{{2, 3, 1}};
    EXPECT_EQ(t.depth(), 2u);
    EXPECT_EQ(t.inputs(), 2u);
    EXPECT_EQ(t.outputs(), 1u);
    EXPECT_EQ(t.width(1), 3u);
    EXPECT_EQ(t.to_string(), "[2,3,1]");
    EXPECT_EQ((Topology{{1, 1}}.depth()), 1u);
    EXPECT_EQ((Topology{{4, 100, 1}}.depth()), 2u);
}

TEST(Topology, RejectsInvalidSizes) {
    EXPECT_THROW(Topology{{3}}, DimensionError);
    EXPECT_THROW(Topology{{}}, DimensionError);
    EXPECT_THROW((Topology{{2, 0, 1}}), DimensionError);
}

TEST(Layout, IndexFormulaIsBijective) {
    std::mt19937_64 rng{11};
    for (int rep = 0; rep < 20; ++rep) {
        const Topology t = testkit::random_topology(1 + rep % 4, 5, rng);
        ParamVector theta{t};
        std::vector<int> hits(t.param_count(), 0);
        std::size_t expected = 0;
        for (std::size_t l = 1; l <= t.depth(); ++l) {
            for (std::size_t j = 0; j < t.width(l); ++j) {
                // bias first, then the incoming row
                EXPECT_EQ(theta.bias_index(l, j), expected++);
                ++hits[theta.bias_index(l, j)];
                for (std::size_t i = 0; i < t.width(l - 1); ++i) {
                    EXPECT_EQ(theta.weight_index(l, j, i), expected++);
                    ++hits[theta.weight_index(l, j, i)];
                }
            }
        }
        EXPECT_EQ(expected, t.param_count());
        for (int h : hits) { EXPECT_EQ(h, 1); }
    }
}

TEST(Layout, StructuredRoundTrip) {
    std::mt19937_64 rng{3};
    const Topology t{{3, 4, 2, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    ParamVector rebuilt{t};
    for (std::size_t l = 1; l <= t.depth(); ++l) {
        for (std::size_t j = 0; j < t.width(l); ++j) {
            rebuilt.bias(l, j) = theta.bias(l, j);
            for (std::size_t i = 0; i < t.width(l - 1); ++i) { rebuilt.weight(l, j, i) = theta.weight(l, j, i); }
        }
    }
    EXPECT_EQ(rebuilt, theta);
}

TEST(Layout, LengthChecked) {
    EXPECT_THROW((ParamVector{Topology{{2, 3, 1}}, std::vector<double>(12)}), DimensionError);
}

TEST(Forward, ZeroNetworkGivesZero) {
    const Topology t{{3, 4, 4, 2}};
    const ParamVector theta{t};
    const auto rec = forward(theta, std::vector<double>{0.3, -1.0, 2.0});
    for (std::size_t l = 1; l <= t.depth(); ++l) {
        for (double a : rec.layer(l)) { EXPECT_EQ(a, 0.0); }
    }
}

TEST(Forward, SinglePathComposition) {
    ParamVector theta{Topology{{1, 1, 1}}};
    theta.weight(1, 0, 0) = 1.0;
    theta.weight(2, 0, 0) = 1.0;
    const auto rec = forward(theta, std::vector<double>{0.5});
    EXPECT_DOUBLE_EQ(rec.output()[0], std::tanh(0.5));
}

TEST(Forward, MatchesStraightLineOracle) {
    std::mt19937_64 rng{2024};
    std::uniform_real_distribution<double> u{-2.0, 2.0};
    for (int rep = 0; rep < 50; ++rep) {
        const Topology t = testkit::random_topology(1 + rep % 4, 6, rng);
        const ParamVector theta = testkit::random_params(t, rng);
        std::vector<double> x(t.inputs());
        for (double& v : x) { v = u(rng); }
        const auto got = forward(theta, x).output();
        const auto want = testkit::oracle_forward({t.sizes().begin(), t.sizes().end()}, theta.values(), x);
        EXPECT_LE(testkit::max_abs_diff(got, want), 1e-12) << t.to_string();
    }
}

TEST(Forward, DimensionMismatchRejected) {
    const ParamVector theta{Topology{{2, 3, 1}}};
    EXPECT_THROW(forward(theta, std::vector<double>{1.0}), DimensionError);
}

TEST(Forward, RepeatedCallsAgreeBitForBit) {
    std::mt19937_64 rng{5};
    const ParamVector theta = testkit::random_params(Topology{{2, 5, 3, 2}}, rng);
    const std::vector<double> x{0.25, -0.75};
    EXPECT_EQ(forward(theta, x).output(), forward(theta, x).output());
}

TEST(Forward, OutputAffineInLastLayer) {
    std::mt19937_64 rng{8};
    const Topology t{{2, 4, 2}};
    const ParamVector a = testkit::random_params(t, rng);
    ParamVector b = a;
    for (double& v : b.row(2, 1)) { v += 1.5; }
    b.bias(2, 1) -= 0.7;
    const std::vector<double> x{0.1, 0.9};
    const auto fa = forward(a, x).output();
    const auto fb = forward(b, x).output();
    for (double s : {0.25, 0.5, 0.8}) {
        ParamVector mid = a;
        for (std::size_t k = 0; k < mid.size(); ++k) { mid.flat()[k] = (1 - s) * a.flat()[k] + s * b.flat()[k]; }
        const auto fm = forward(mid, x).output();
        EXPECT_NEAR(fm[1], (1 - s) * fa[1] + s * fb[1], 1e-12);
        EXPECT_DOUBLE_EQ(fm[0], fa[0]);
    }
}

TEST(Risk, SingleSampleOutputZero) {
    const ParamVector theta{Topology{{1, 2, 1}}};
    const Dataset d = make_dataset("one", Matrix(1, 1, {0.4}), Matrix(1, 1, {1.0}));
    EXPECT_DOUBLE_EQ(empirical_risk(theta, d), 1.0);
}

TEST(Risk, ZeroNetworkEqualsMeanLossAtZero) {
    std::mt19937_64 rng{17};
    const Dataset d = testkit::random_dataset(3, 2, 9, rng);
    const ParamVector theta{Topology{{3, 5, 2}}};
    double want = 0.0;
    for (std::size_t p = 0; p < d.size(); ++p) {
        const auto y = d.y(p);
        want += (y[0] * y[0] + y[1] * y[1]) / 2.0;
    }
    EXPECT_NEAR(empirical_risk(theta, d), want / 9.0, 1e-15);
}

TEST(Risk, ThreeSampleHandComputation) {
    // [1,1,1] with w1 = 2, s1 = 0, w2 = 3, s2 = 1: f(x) = 3 tanh(2x) + 1.
    ParamVector theta{Topology{{1, 1, 1}}};
    theta.weight(1, 0, 0) = 2.0;
    theta.weight(2, 0, 0) = 3.0;
    theta.bias(2, 0) = 1.0;
    const Dataset d = make_dataset("three", Matrix(3, 1, {0.0, 0.5, -1.0}), Matrix(3, 1, {1.0, 2.0, 0.0}));
    const double e0 = 3 * std::tanh(0.0) + 1 - 1.0;
    const double e1 = 3 * std::tanh(1.0) + 1 - 2.0;
    const double e2 = 3 * std::tanh(-2.0) + 1 - 0.0;
    EXPECT_NEAR(empirical_risk(theta, d), (e0 * e0 + e1 * e1 + e2 * e2) / 3.0, 1e-14);
}

TEST(Risk, PerfectFitIsZero) {
    std::mt19937_64 rng{21};
    const ParamVector theta = testkit::random_params(Topology{{2, 3, 2}}, rng);
    Matrix X(6, 2), Y(6, 2);
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    for (std::size_t p = 0; p < 6; ++p) {
        X(p, 0) = u(rng);
        X(p, 1) = u(rng);
        const auto f = forward(theta, X.row(p)).output();
        Y(p, 0) = f[0];
        Y(p, 1) = f[1];
    }
    EXPECT_EQ(empirical_risk(theta, make_dataset("fit", X, Y)), 0.0);
}

TEST(Risk, IncompatibleDatasetRejected) {
    std::mt19937_64 rng{1};
    const Dataset d = testkit::random_dataset(3, 1, 4, rng);
    EXPECT_THROW(empirical_risk(ParamVector{Topology{{2, 3, 1}}}, d), DimensionError);
    EXPECT_THROW(empirical_risk(ParamVector{Topology{{2, 3, 1}}}, Dataset{}), InvalidArgument);
}

TEST(Dataset, RejectsNonFiniteAndMismatch) {
    EXPECT_THROW(make_dataset("bad", Matrix(1, 1, {NAN}), Matrix(1, 1, {0.0})), InvalidArgument);
    EXPECT_THROW(make_dataset("bad", Matrix(2, 1), Matrix(1, 1)), DimensionError);
    EXPECT_THROW(make_dataset("bad", Matrix(0, 1), Matrix(0, 1)), InvalidArgument);
}

TEST(Functions, ActivationsAndLoss) {
    const auto g = tanh_activation();
    EXPECT_DOUBLE_EQ(g.value(0.3), std::tanh(0.3));
    EXPECT_NEAR(g.derivative(0.3), 1 - std::tanh(0.3) * std::tanh(0.3), 1e-15);
    EXPECT_EQ(activation_by_name("logistic").name, "logistic");
    EXPECT_THROW(activation_by_name("relu"), ConfigError);
    const auto loss = mse_loss();
    const std::vector<double> y{1.0, 0.0}, f{0.0, 2.0};
    EXPECT_DOUBLE_EQ(loss.value(y, f), 2.5);
    std::vector<double> out(2);
    loss.derivative(y, f, out);
    EXPECT_DOUBLE_EQ(out[0], -1.0);
    EXPECT_DOUBLE_EQ(out[1], 2.0);
}
