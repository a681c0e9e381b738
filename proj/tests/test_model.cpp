#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "smrl/errors.hpp"
#include "smrl/model.hpp"
#include "smrl/quadrature.hpp"

using namespace smrl;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

std::vector<Vec> scalar_actions(std::initializer_list<double> xs) {
    std::vector<Vec> a;
    for (double x : xs) a.push_back(v1(x));
    return a;
}

// sigma = 1, W = w, phi(s, a) = s + a on [lo, hi].
ExpFamilyModel gauss1(double w, double sigma = 1.0, double lo = -10, double hi = 10) {
    return make_gaussian_model(Mat::Constant(1, 1, w), sigma, Box::cube(1, lo, hi),
                               scalar_actions({0.0, 0.5}), std::make_shared<SumActionFeatures>(1));
}

void fd_check_psi(const StateFeatures& psi, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double h = 1e-5;
    for (int t = 0; t < 100; ++t) {
        Vec s(psi.state_dim());
        for (auto& x : s) x = u(rng);
        for (int i = 0; i < psi.state_dim(); ++i) {
            Vec sp = s, sm = s;
            sp(i) += h;
            sm(i) -= h;
            const Vec fd1 = (psi.value(sp) - psi.value(sm)) / (2 * h);
            const Vec fd2 = (psi.partial(i, sp) - psi.partial(i, sm)) / (2 * h);
            const Vec d1 = psi.partial(i, s), d2 = psi.partial2(i, s);
            for (int k = 0; k < psi.dim(); ++k) {
                EXPECT_NEAR(fd1(k), d1(k), 1e-5 * std::max(1.0, std::abs(d1(k))));
                EXPECT_NEAR(fd2(k), d2(k), 1e-5 * std::max(1.0, std::abs(d2(k))));
            }
        }
    }
}

void fd_check_base(const BaseMeasure& q, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double h = 1e-5;
    for (int t = 0; t < 100; ++t) {
        Vec s(q.state_dim());
        for (auto& x : s) x = u(rng);
        for (int i = 0; i < q.state_dim(); ++i) {
            Vec sp = s, sm = s;
            sp(i) += h;
            sm(i) -= h;
            const double fd1 = (q.log_q(sp) - q.log_q(sm)) / (2 * h);
            const double fd2 = (q.dlog_q(i, sp) - q.dlog_q(i, sm)) / (2 * h);
            EXPECT_NEAR(fd1, q.dlog_q(i, s), 1e-5 * std::max(1.0, std::abs(fd1)));
            EXPECT_NEAR(fd2, q.d2log_q(i, s), 1e-5 * std::max(1.0, std::abs(fd2)));
        }
    }
}

}  // namespace

TEST(Features, PsiDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(11);
    fd_check_psi(ScaledIdentityFeatures(2, 1.0 / 0.09), rng, -2, 2);
    fd_check_psi(PolynomialFeatures(4), rng, -2, 2);
}

TEST(Features, BaseMeasureDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(12);
    fd_check_base(GaussianBase(2, 0.7), rng, -3, 3);
    fd_check_base(FlatBase(1, 0.3), rng, -3, 3);
}

TEST(Features, PhiBoundHoldsOnSampledInputs) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    const Box box = Box::cube(2, -2.5, 2.5);
    std::vector<Vec> acts{v2(-1, 0), v2(0.5, 1), v2(1, -1)};
    for (const std::string preset : {"linear", "tanh", "sum"}) {
        const auto phi = make_action_features(preset, 2, 2);
        const double B = phi->bound(box, acts);
        for (int t = 0; t < 200; ++t) {
            const Vec s = v2(u(rng), u(rng));
            for (const auto& a : acts) EXPECT_LE(phi->value(s, a).norm(), B + 1e-12) << preset;
        }
    }
    EXPECT_THROW(make_action_features("bogus", 1, 1), ConfigError);
}

TEST(Density, ZeroParameterFlatBaseIsZero) {
    ExpFamilyModel m;
    m.psi = std::make_shared<PolynomialFeatures>(2);
    m.base = std::make_shared<FlatBase>(1);
    m.phi = std::make_shared<LinearActionFeatures>(1, 1);
    m.W = Mat::Zero(2, 2);
    m.domain = Box::cube(1, -1, 1);
    m.actions = scalar_actions({0.0, 1.0});
    m.validate();
    for (double x : {-0.9, 0.0, 0.7})
        for (int a = 0; a < 2; ++a) EXPECT_EQ(log_unnormalized_density(m, v1(0.3), a, v1(x)), 0.0);
}

TEST(Density, GaussianExample) {
    ExpFamilyModel m = gauss1(1.0);
    const double expect = -0.5 - 0.5 * std::log(2 * std::numbers::pi) + 1.0;
    EXPECT_NEAR(log_unnormalized_density(m, v1(1.0), 0, v1(1.0)), expect, 1e-14);
}

TEST(Density, PolynomialExampleMatchesHandExpansion) {
    // psi = (s', s'^2), phi = (s, a), W = I, flat q:
    // <psi, W phi> = s' s + s'^2 a
    ExpFamilyModel m;
    m.psi = std::make_shared<PolynomialFeatures>(2);
    m.base = std::make_shared<FlatBase>(1);
    m.phi = std::make_shared<LinearActionFeatures>(1, 1);
    m.W = Mat::Identity(2, 2);
    m.domain = Box::cube(1, -2, 2);
    m.actions = scalar_actions({-0.5, 0.25});
    const double s = 0.7, sp = -1.3;
    EXPECT_NEAR(log_unnormalized_density(m, v1(s), 0, v1(sp)), sp * s + sp * sp * -0.5, 1e-14);
    EXPECT_NEAR(log_unnormalized_density(m, v1(s), 1, v1(sp)), sp * s + sp * sp * 0.25, 1e-14);
}

TEST(Density, NonFiniteFeaturesRaiseDomainError) {
    ExpFamilyModel m = gauss1(1.0);
    m.phi = std::make_shared<FunctionActionFeatures>(
        1, 1, 1, [](const Vec&, const Vec&) { return v1(std::nan("")); }, 1.0, "broken");
    try {
        log_unnormalized_density(m, v1(0.0), 0, v1(0.0));
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
    }
}

TEST(LogPartition, GaussianClosedForm) {
    // sigma = 1: Z = (W phi)^2 / 2
    for (double w : {-1.5, 0.3, 2.0}) {
        const ExpFamilyModel m = gauss1(w);
        const double phi = 0.8 + 0.5;
        EXPECT_NEAR(log_partition_quadrature(m, v1(0.8), 1, 4096), 0.5 * w * w * phi * phi, 1e-6);
    }
}

TEST(LogPartition, ZeroParameterProperBaseIsZero) {
    EXPECT_NEAR(log_partition_quadrature(gauss1(0.0), v1(0.2), 0, 4096), 0.0, 1e-6);
}

TEST(LogPartition, ResolutionDoublingConverges) {
    const ExpFamilyModel m = gauss1(0.9, 0.8, -6, 6);
    const double z1 = log_partition_quadrature(m, v1(0.4), 1, 1024);
    const double z2 = log_partition_quadrature(m, v1(0.4), 1, 2048);
    EXPECT_LT(std::abs(z1 - z2), 1e-8);
}

TEST(LogPartition, ThreeDimensionalDomainUnsupported) {
    const auto m = make_gaussian_model(Mat::Identity(3, 3), 1.0, Box::cube(3, -1, 1),
                                       {Vec::Zero(3)}, std::make_shared<SumActionFeatures>(3));
    EXPECT_THROW(log_partition_quadrature(m, Vec::Zero(3), 0, 16), UnsupportedDimension);
}

TEST(LogPartition, NormalizedDensityIsGaussianPdf) {
    const double sigma = 0.7, w = 1.2;
    const ExpFamilyModel m = gauss1(w, sigma, -8, 8);
    const Vec s = v1(0.3);
    const double logz = log_partition_quadrature(m, s, 1, 4096);
    const double mu = w * (0.3 + 0.5);
    for (double x = -3; x <= 4; x += 0.25) {
        const double p = std::exp(log_unnormalized_density(m, s, 1, v1(x)) - logz);
        const double ref = std::exp(-0.5 * std::pow((x - mu) / sigma, 2)) /
                           (sigma * std::sqrt(2 * std::numbers::pi));
        EXPECT_NEAR(p, ref, 1e-6) << x;
    }
}

TEST(LogPartition, DensitiesIntegrateToOne) {
    const ExpFamilyModel m1 = gauss1(0.8, 0.5, -3, 3);
    const GridDensity g1 = grid_density(m1, m1.W, v1(0.2), 1, 512);
    double total = 0.0;
    for (std::size_t k = 0; k < g1.mass.size(); ++k)
        total += g1.rule.weights[k] * std::exp(log_unnormalized_density(m1, v1(0.2), 1, g1.rule.nodes[k]) -
                                               g1.log_partition);
    EXPECT_NEAR(total, 1.0, 1e-4);

    const auto m2 = make_gaussian_model(Mat::Identity(2, 2) * 0.7, 0.6, Box::cube(2, -3, 3),
                                        {v2(0, 0), v2(0.5, -0.5)},
                                        std::make_shared<SumActionFeatures>(2));
    const GridDensity g2 = grid_density(m2, m2.W, v2(0.3, -0.4), 1, 128);
    total = 0.0;
    for (std::size_t k = 0; k < g2.mass.size(); ++k)
        total += g2.rule.weights[k] *
                 std::exp(log_unnormalized_density(m2, v2(0.3, -0.4), 1, g2.rule.nodes[k]) -
                          g2.log_partition);
    EXPECT_NEAR(total, 1.0, 1e-4);

    const auto poly = make_polynomial_model(2, 1.0, (Mat(2, 1) << 0.5, -0.3).finished(),
                                            Box::cube(1, -3, 3), scalar_actions({1.0}),
                                            std::make_shared<FunctionActionFeatures>(
                                                1, 1, 1, [](const Vec&, const Vec& a) { return a; }, 1.0));
    const GridDensity g3 = grid_density(poly, poly.W, v1(0.0), 0, 1024);
    total = 0.0;
    for (double m : g3.mass) total += m;
    EXPECT_NEAR(total, 1.0, 1e-12);
}

namespace {

NonLdsInstance scalar_instance(double w0, double sigma, double lo, double hi) {
    NonLdsInstance inst;
    inst.W0 = Mat::Constant(1, 1, w0);
    inst.sigma = sigma;
    inst.clip_box = Box::cube(1, lo, hi);
    inst.phi = std::make_shared<SumActionFeatures>(1);
    inst.actions = scalar_actions({0.0, 0.5});
    return inst;
}

}  // namespace

TEST(Sampling, NoiselessLimitIsClippedMean) {
    NonLdsInstance inst = scalar_instance(1.0, 1e-300, -1, 1);
    Rng rng(3);
    EXPECT_EQ(sample_transition(inst, v1(0.3), 1, rng)(0), 0.8);
    EXPECT_EQ(sample_transition(inst, v1(0.9), 1, rng)(0), 1.0);
}

TEST(Sampling, MonteCarloMean) {
    NonLdsInstance inst = scalar_instance(1.0, 0.1, -10, 10);
    Rng rng = make_stream(5, 0, 0, stream::kTrial);
    double sum = 0.0;
    const int n = 100000;
    for (int t = 0; t < n; ++t) sum += sample_transition(inst, v1(0.5), 1, rng)(0);
    EXPECT_NEAR(sum / n, 1.0, 0.002);
}

TEST(Sampling, SaturatedClipping) {
    NonLdsInstance inst = scalar_instance(5.0, 0.3, -1, 1);
    Rng rng(9);
    for (int t = 0; t < 1000; ++t) {
        const TransitionDraw d = draw_transition(inst, v1(0.5), 1, rng);
        EXPECT_EQ(d.clipped(0), 1.0);
        EXPECT_GT(d.raw(0), 1.0);
    }
}

TEST(Sampling, StreamsAreReproducible) {
    Rng a = make_stream(1, 2, 3, stream::kTransition), b = make_stream(1, 2, 3, stream::kTransition);
    Rng c = make_stream(1, 2, 3, stream::kCandidates);
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
}

TEST(Sampling, InverseCdfMatchesGaussianMoments) {
    const ExpFamilyModel m = gauss1(1.0, 0.5, -5, 5);
    const GridDensity g = grid_density(m, m.W, v1(0.2), 0, 2048);
    Rng rng(21);
    double sum = 0.0, sq = 0.0;
    const int n = 50000;
    for (int t = 0; t < n; ++t) {
        const double x = sample_inverse_cdf_1d(g, rng);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n, var = sq / n - mean * mean;
    EXPECT_NEAR(mean, 0.2, 4 * 0.5 / std::sqrt(n));
    EXPECT_NEAR(var, 0.25, 0.01);
}

TEST(Model, ValidateRejectsShapeMismatch) {
    ExpFamilyModel m = gauss1(1.0);
    m.W = Mat::Zero(2, 1);
    EXPECT_THROW(m.validate(), ShapeError);
    EXPECT_THROW(make_gaussian_model(Mat::Zero(1, 1), 0.0, Box::cube(1, -1, 1), scalar_actions({0}),
                                     std::make_shared<SumActionFeatures>(1)),
                 ArgumentError);
}

TEST(Model, NonLdsScoreFeatureShapes) {
    // psi = s'/sigma^2, log q = -s'^2 / (2 sigma^2): score is (W phi - s') / sigma^2
    const double sigma = 0.4, w = 1.1;
    const ExpFamilyModel m = gauss1(w, sigma);
    const Vec g = score(m, m.W, v1(0.2), 1, v1(0.9));
    EXPECT_NEAR(g(0), (w * 0.7 - 0.9) / (sigma * sigma), 1e-12);
}

TEST(Reward, QuadraticTargetClamps) {
    const RewardFn r = RewardFn::quadratic_target(v1(1.0), 2.0, 0.1);
    EXPECT_DOUBLE_EQ(r(v1(1.0), v1(0.0)), 1.0);
    EXPECT_DOUBLE_EQ(r(v1(2.0), v1(1.0)), 1.0 - 0.5 - 0.1);
    EXPECT_DOUBLE_EQ(r(v1(-5.0), v1(0.0)), 0.0);
    EXPECT_DOUBLE_EQ(RewardFn::zero(1)(v1(1.0), v1(0.0)), 0.0);
}
