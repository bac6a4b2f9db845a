#include "grownet/grownet.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grownet;

namespace {

std::vector<double> uniform(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u{lo, hi};
    std::vector<double> v(n);
    for (double& x : v) { x = u(rng); }
    return v;
}

// One random draw of each map at `layer`.
std::vector<EmbeddingSpec> all_maps(const Topology& t, std::size_t layer, std::size_t count, std::mt19937_64& rng) {
    std::vector<double> lambda = uniform(count + 1, rng, 0.1, 1.0);
    double total = 0.0;
    for (double v : lambda) { total += v; }
    for (double& v : lambda) { v /= total; }
    double rest = 0.0;
    for (std::size_t i = 1; i < lambda.size(); ++i) { rest += lambda[i]; }
    lambda[0] = 1.0 - rest;
    std::uniform_int_distribution<std::size_t> pick{0, t.width(layer) - 1};
    return {
        EmbeddingSpec{layer, count, AlphaParams{uniform(count, rng), uniform(count * t.width(layer - 1), rng)}},
        EmbeddingSpec{layer, count, BetaParams{uniform(count, rng), uniform(t.width(layer + 1) * count, rng)}},
        EmbeddingSpec{layer, count, GammaParams{pick(rng), lambda}},
    };
}

} // namespace

TEST(Embedding, ZeroCountIsIdentity) {
    std::mt19937_64 rng{1};
    const ParamVector theta = testkit::random_params(Topology{{2, 3, 1}}, rng);
    EXPECT_EQ(embed_alpha(theta, 1, 0, {}, {}), theta);
    EXPECT_EQ(embed_beta(theta, 1, 0, {}, {}), theta);
    EXPECT_EQ(embed_gamma(theta, 1, 0, 2, std::vector<double>{1.0}), theta);
}

TEST(Embedding, GrowthCountExamples) {
    EXPECT_EQ(count_embedding_growth(Topology{{2, 3, 1}}, 1, 1), 4u);
    EXPECT_EQ(count_embedding_growth(Topology{{4, 10, 1}}, 1, 10), 60u);
    EXPECT_THROW(count_embedding_growth(Topology{{4, 10, 1}}, 2, 1), EmbeddingError);
    EXPECT_THROW(count_embedding_growth(Topology{{4, 10, 1}}, 0, 1), EmbeddingError);
}

TEST(Embedding, GrowthCountMatchesGrownTopology) {
    std::mt19937_64 rng{2};
    for (int rep = 0; rep < 30; ++rep) {
        const Topology t = testkit::random_topology(2 + rep % 3, 5, rng);
        const ParamVector theta = testkit::random_params(t, rng);
        const std::size_t layer = 1 + rep % (t.depth() - 1);
        const std::size_t count = 1 + rep % 3;
        for (const auto& spec : all_maps(t, layer, count, rng)) {
            const ParamVector grown = embed(theta, spec);
            EXPECT_EQ(grown.size() - theta.size(), count_embedding_growth(t, layer, count)) << spec.describe();
            EXPECT_EQ(grown.topology().width(layer), t.width(layer) + count);
        }
    }
}

TEST(Embedding, FunctionAndRiskPreserved) {
    std::mt19937_64 rng{3};
    std::uniform_real_distribution<double> u{-2.0, 2.0};
    for (int rep = 0; rep < 40; ++rep) {
        const Topology t = testkit::random_topology(2 + rep % 3, 4, rng);
        const ParamVector theta = testkit::random_params(t, rng);
        const Dataset d = testkit::random_dataset(t.inputs(), t.outputs(), 6, rng);
        const std::size_t layer = 1 + rep % (t.depth() - 1);
        for (const auto& spec : all_maps(t, layer, 1 + rep % 3, rng)) {
            const ParamVector grown = embed(theta, spec);
            std::vector<double> x(t.inputs());
            for (double& v : x) { v = u(rng); }
            const auto before = forward(theta, x);
            const auto after = forward(grown, x);
            EXPECT_LE(testkit::max_abs_diff(before.output(), after.output()), 1e-12) << spec.describe();
            for (std::size_t l = 1; l <= t.depth(); ++l) {
                // surviving neurons keep their pre-activations
                const auto a = before.layer(l);
                const auto b = std::span<const double>{after.layer(l)}.first(a.size());
                EXPECT_LE(testkit::max_abs_diff(a, b), 1e-12) << spec.describe() << " layer " << l;
            }
            EXPECT_NEAR(empirical_risk(grown, d), empirical_risk(theta, d), 1e-12 * (1 + empirical_risk(theta, d)));
        }
    }
}

TEST(Embedding, NewNeuronPreActivations) {
    std::mt19937_64 rng{4};
    const Topology t{{3, 4, 3, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const std::vector<double> x{0.3, -0.8, 0.5};
    const auto base = forward(theta, x);
    for (std::size_t layer : {1u, 2u}) {
        const std::vector<double> zeta{0.25, 0.75};
        const auto beta = forward(embed_beta(theta, layer, 2, zeta, uniform(t.width(layer + 1) * 2, rng)), x);
        EXPECT_EQ(beta.layer(layer)[t.width(layer)], 0.25);
        EXPECT_EQ(beta.layer(layer)[t.width(layer) + 1], 0.75);
        const auto gamma = forward(embed_gamma(theta, layer, 2, 1, std::vector<double>{0.5, 0.3, 0.2}), x);
        EXPECT_EQ(gamma.layer(layer)[t.width(layer)], base.layer(layer)[1]);
        EXPECT_EQ(gamma.layer(layer)[t.width(layer) + 1], base.layer(layer)[1]);
    }
}

TEST(Embedding, AlphaWithZeroRowsEqualsBetaWithZeroWeights) {
    std::mt19937_64 rng{5};
    const Topology t{{2, 3, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const std::vector<double> zeta{0.4, 0.9};
    const ParamVector a = embed_alpha(theta, 1, 2, zeta, std::vector<double>(4, 0.0));
    const ParamVector b = embed_beta(theta, 1, 2, zeta, std::vector<double>(4, 0.0));
    EXPECT_EQ(a, b);
}

TEST(Embedding, GammaDegenerateSplit) {
    std::mt19937_64 rng{6};
    const Topology t{{2, 3, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const ParamVector g = embed_gamma(theta, 1, 1, 0, std::vector<double>{1.0, 0.0});
    for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_EQ(g.weight(2, j, 0), theta.weight(2, j, 0));
        EXPECT_EQ(g.weight(2, j, 3), 0.0);
    }
    EXPECT_EQ(g.bias(1, 3), theta.bias(1, 0));
}

TEST(Embedding, ParameterErrors) {
    std::mt19937_64 rng{7};
    const ParamVector theta = testkit::random_params(Topology{{2, 3, 1}}, rng);
    EXPECT_THROW(embed_gamma(theta, 1, 1, 0, std::vector<double>{0.6, 0.6}), EmbeddingError);
    EXPECT_THROW(embed_gamma(theta, 1, 1, 3, std::vector<double>{0.5, 0.5}), EmbeddingError);
    EXPECT_THROW(embed_gamma(theta, 1, 2, 0, std::vector<double>{0.5, 0.5}), EmbeddingError);
    EXPECT_THROW(embed_alpha(theta, 1, 1, std::vector<double>{0.1}, std::vector<double>{0.1}), EmbeddingError);
    EXPECT_THROW(embed_beta(theta, 2, 1, std::vector<double>{0.1}, std::vector<double>{0.1}), EmbeddingError);
    EXPECT_THROW(embed_alpha(ParamVector{Topology{{2, 1}}}, 1, 1, std::vector<double>{0.1},
                             std::vector<double>{0.1, 0.2}),
                 EmbeddingError);
}

TEST(Composite, EmptyPlanIsIdentity) {
    std::mt19937_64 rng{8};
    const ParamVector theta = testkit::random_params(Topology{{2, 2, 2, 1}}, rng);
    const auto r = embed_composite(theta, CompositePlan{}, RandomParamSource{1});
    EXPECT_EQ(r.grown, theta);
    EXPECT_TRUE(r.applied.empty());
}

TEST(Composite, AllAlphaPlanPreservesRisk) {
    std::mt19937_64 rng{9};
    const Topology t{{2, 2, 2, 1}};
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(2, 1, 10, rng);
    const CompositePlan plan{{{1, 1, EmbeddingKind::Alpha}, {2, 2, EmbeddingKind::Alpha}}};
    const auto r = embed_composite(theta, plan, RandomParamSource{3});
    EXPECT_EQ(r.grown.topology().to_string(), "[2,3,4,1]");
    EXPECT_NEAR(empirical_risk(r.grown, d), empirical_risk(theta, d), 1e-12);
    ASSERT_EQ(r.applied.size(), 2u);
    EXPECT_EQ(embed_chain(theta, r.applied), r.grown);
}

TEST(Composite, MixedPlanPreservesRisk) {
    std::mt19937_64 rng{10};
    const Topology t{{3, 3, 2, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(3, 2, 10, rng);
    RandomParamSource src{4};
    src.beta_outgoing_scale = 1.0;
    src.random_lambda = true;
    const CompositePlan plan{{{2, 2, EmbeddingKind::Gamma}, {1, 3, EmbeddingKind::Beta}}};
    const auto r = embed_composite(theta, plan, std::ref(src));
    EXPECT_EQ(r.grown.topology().to_string(), "[3,6,4,2]");
    EXPECT_NEAR(empirical_risk(r.grown, d), empirical_risk(theta, d), 1e-12);
}

TEST(Composite, DuplicateLayerRejectedWithStepIndex) {
    std::mt19937_64 rng{11};
    const ParamVector theta = testkit::random_params(Topology{{2, 2, 2, 1}}, rng);
    const CompositePlan plan{{{1, 1, EmbeddingKind::Alpha}, {2, 1, EmbeddingKind::Beta}, {1, 1, EmbeddingKind::Gamma}}};
    try {
        embed_composite(theta, plan, RandomParamSource{1});
        FAIL() << "duplicate layer accepted";
    } catch (const CompositeStepError& e) {
        EXPECT_EQ(e.step(), 2u);
    }
}

TEST(Composite, BadLambdaReportsStep) {
    std::mt19937_64 rng{12};
    const ParamVector theta = testkit::random_params(Topology{{2, 2, 2, 1}}, rng);
    const std::vector<EmbeddingSpec> specs{
        EmbeddingSpec{1, 1, AlphaParams{{0.5}, {0.1, 0.2}}},
        EmbeddingSpec{2, 1, GammaParams{0, {0.7, 0.7}}},
    };
    try {
        embed_chain(theta, specs);
        FAIL() << "invalid lambda accepted";
    } catch (const CompositeStepError& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

TEST(Manifold, BetaRiskIndependentOfZeta) {
    std::mt19937_64 rng{13};
    const Topology t{{2, 3, 1}};
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(2, 1, 8, rng);
    const double r0 = empirical_risk(theta, d);
    for (int rep = 0; rep < 20; ++rep) {
        const auto zeta = uniform(2, rng, -3.0, 3.0);
        EXPECT_NEAR(empirical_risk(embed_beta(theta, 1, 2, zeta, std::vector<double>(2, 0.0)), d), r0, 1e-12);
    }
}

TEST(Manifold, GammaRiskIndependentOfLambda) {
    std::mt19937_64 rng{14};
    const Topology t{{2, 3, 2}};
    const ParamVector theta = testkit::random_params(t, rng);
    const Dataset d = testkit::random_dataset(2, 2, 8, rng);
    const double r0 = empirical_risk(theta, d);
    for (int rep = 0; rep < 20; ++rep) {
        // off the positive orthant is still on the affine constraint
        std::vector<double> lambda = uniform(3, rng, -2.0, 2.0);
        lambda[0] = 1.0 - lambda[1] - lambda[2];
        EXPECT_NEAR(empirical_risk(embed_gamma(theta, 1, 2, 2, lambda), d), r0, 1e-12);
    }
}

TEST(RandomSource, DefaultsAndDeterminism) {
    const Topology t{{2, 4, 3}};
    const ParamVector theta{t};
    RandomParamSource a{42}, b{42};
    const PlanStep step{1, 3, EmbeddingKind::Gamma};
    const auto sa = a(0, step, theta);
    const auto sb = b(0, step, theta);
    const auto& ga = std::get<GammaParams>(sa.params);
    EXPECT_EQ(ga.source, std::get<GammaParams>(sb.params).source);
    for (double v : ga.lambda) { EXPECT_DOUBLE_EQ(v, 0.25); }
    const auto alpha = a(0, PlanStep{1, 2, EmbeddingKind::Alpha}, theta);
    for (double v : std::get<AlphaParams>(alpha.params).incoming) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    const auto beta = a(0, PlanStep{1, 2, EmbeddingKind::Beta}, theta);
    for (double v : std::get<BetaParams>(beta.params).outgoing) { EXPECT_EQ(v, 0.0); }
}
