#include "grownet/grownet.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grownet;

namespace {

// Componentwise relative agreement, with a floor so entries near zero are
// judged against the finite-difference noise level instead.
::testing::AssertionResult agree(const GradientVector& a, const GradientVector& b, double rel) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double x = a.flat()[k], y = b.flat()[k];
        if (std::abs(x - y) > rel * std::max(std::abs(y), 1e-4)) {
            return ::testing::AssertionFailure() << "component " << k << ": " << x << " vs " << y;
        }
    }
    return ::testing::AssertionSuccess();
}

} // namespace

TEST(Gradient, MatchesCentralDifferences) {
    std::mt19937_64 rng{99};
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t depth = 1 + rep % 3;
        const Topology t = testkit::random_topology(depth, 4, rng);
        const ParamVector theta = testkit::random_params(t, rng);
        const Dataset d = testkit::random_dataset(t.inputs(), t.outputs(), 7, rng);
        EXPECT_TRUE(agree(gradient_forward(theta, d), gradient_finite_diff(theta, d), 1e-5)) << t.to_string();
    }
}

TEST(Gradient, LogisticActivationAlsoAgrees) {
    std::mt19937_64 rng{4};
    const Topology t{{2, 3, 3, 1}};
    const auto g = logistic_activation();
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(2, 1, 5, rng);
    EXPECT_TRUE(agree(gradient_forward(theta, d, mse_loss(), g), gradient_finite_diff(theta, d, mse_loss(), g), 1e-5));
}

TEST(Gradient, SingleNeuronClosedForm) {
    // f = v tanh(w x + s) + b on one sample; layout is [s, w, b, v].
    const double s = 0.2, w = -0.7, b = 0.1, v = 1.3, x = 0.9, y = -0.4;
    const ParamVector theta{Topology{{1, 1, 1}}, std::vector<double>{s, w, b, v}};
    const Dataset d = make_dataset("one", Matrix(1, 1, {x}), Matrix(1, 1, {y}));
    const double th = std::tanh(w * x + s);
    const double e = v * th + b - y;
    const auto rg = risk_and_gradient(theta, d);
    EXPECT_NEAR(rg.risk, e * e, 1e-15);
    EXPECT_NEAR(rg.gradient.flat()[0], 2 * e * v * (1 - th * th), 1e-14);
    EXPECT_NEAR(rg.gradient.flat()[1], 2 * e * v * (1 - th * th) * x, 1e-14);
    EXPECT_NEAR(rg.gradient.flat()[2], 2 * e, 1e-14);
    EXPECT_NEAR(rg.gradient.flat()[3], 2 * e * th, 1e-14);
}

TEST(Gradient, ZeroAtPerfectFit) {
    std::mt19937_64 rng{12};
    const Topology t{{2, 3, 2, 1}};
    const ParamVector theta = testkit::random_params(t, rng);
    Matrix X(5, 2), Y(5, 1);
    std::uniform_real_distribution<double> u{-1.0, 1.0};
    for (std::size_t p = 0; p < 5; ++p) {
        X(p, 0) = u(rng);
        X(p, 1) = u(rng);
        Y(p, 0) = forward(theta, X.row(p)).output()[0];
    }
    EXPECT_EQ(grad_norm_inf(gradient_forward(theta, make_dataset("fit", X, Y))), 0.0);
}

TEST(Gradient, RiskIsSampleAverage) {
    std::mt19937_64 rng{31};
    const Topology t{{3, 4, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(3, 2, 6, rng);
    GradientVector sum{t};
    for (std::size_t p = 0; p < d.size(); ++p) {
        const Dataset one = make_dataset("p", Matrix(1, 3, {d.x(p)[0], d.x(p)[1], d.x(p)[2]}),
                                         Matrix(1, 2, {d.y(p)[0], d.y(p)[1]}));
        const auto gp = gradient_forward(theta, one);
        for (std::size_t k = 0; k < sum.size(); ++k) { sum.flat()[k] += gp.flat()[k] / 6.0; }
    }
    const auto whole = risk_and_gradient(theta, d);
    EXPECT_LE(testkit::max_abs_diff(whole.gradient.values(), sum.values()), 1e-14);
    EXPECT_DOUBLE_EQ(whole.risk, empirical_risk(theta, d));
}

TEST(Gradient, FiniteDiffRejectsBadStep) {
    std::mt19937_64 rng{1};
    const ParamVector theta = testkit::random_params(Topology{{1, 2, 1}}, rng);
    const Dataset d = testkit::random_dataset(1, 1, 3, rng);
    EXPECT_THROW(gradient_finite_diff(theta, d, mse_loss(), tanh_activation(), 0.0), InvalidArgument);
    EXPECT_THROW(gradient_finite_diff(theta, d, mse_loss(), tanh_activation(), -1e-6), InvalidArgument);
}

TEST(Gradient, IncompatibleDatasetRejected) {
    std::mt19937_64 rng{1};
    const ParamVector theta = testkit::random_params(Topology{{2, 2, 1}}, rng);
    EXPECT_THROW(gradient_forward(theta, testkit::random_dataset(2, 3, 4, rng)), DimensionError);
}

TEST(Norms, Examples) {
    GradientVector v{Topology{{1, 1, 1}}, std::vector<double>{3.0, -4.0, 0.0, 0.0}};
    EXPECT_EQ(norm_inf(v), 4.0);
    EXPECT_DOUBLE_EQ(norm_2(v), 5.0);
    EXPECT_EQ(norm_inf(GradientVector{Topology{{1, 1, 1}}}), 0.0);
    GradientVector big{Topology{{1, 1}}, std::vector<double>{1e200, 1e200}};
    EXPECT_DOUBLE_EQ(norm_2(big), std::sqrt(2.0) * 1e200);
}
