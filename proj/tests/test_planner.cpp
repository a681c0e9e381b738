#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smrl/errors.hpp"
#include "smrl/planner.hpp"

using namespace smrl;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

std::vector<Vec> scalar_actions(std::initializer_list<double> xs) {
    std::vector<Vec> a;
    for (double x : xs) a.push_back(v1(x));
    return a;
}

ExpFamilyModel benchmark_model(double sigma = 0.3) {
    return make_gaussian_model((Mat(1, 2) << 1.2, 0.8).finished(), sigma, Box::cube(1, -2.5, 2.5),
                               scalar_actions({-1, -0.5, 0, 0.5, 1}),
                               std::make_shared<TanhActionFeatures>(1, 1));
}

RewardFn target_reward() { return RewardFn::quadratic_target(v1(1.5), 1.0); }

}  // namespace

TEST(Grid, IndexingIsBijective) {
    const StateGrid g(Box::cube(2, -1, 1), {3, 4});
    EXPECT_EQ(g.num_cells(), 12);
    for (int c = 0; c < g.num_cells(); ++c) {
        EXPECT_EQ(g.flat(g.multi(c)), c);
        EXPECT_EQ(g.cell_of(g.center(c)), c);
        EXPECT_TRUE(g.cell_box(c).contains(g.center(c)));
    }
    EXPECT_EQ(g.multi(1)[0], 1);  // axis 0 fastest
    EXPECT_EQ(g.cell_of(Vec::Constant(2, 1.0)), 11);
    EXPECT_EQ(g.cell_of(Vec::Constant(2, -7.0)), 0);
    EXPECT_DOUBLE_EQ(g.edge(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(g.edge(0, 3), 1.0);
    EXPECT_EQ(g.refined().num_cells(), 48);
}

TEST(Table, RowsAreDistributions) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 21);
    const TransitionTable t = build_transition_table(m, m.W, g);
    for (int c = 0; c < g.num_cells(); ++c)
        for (int a = 0; a < m.num_actions(); ++a) {
            double sum = 0.0;
            for (int n = 0; n < g.num_cells(); ++n) {
                EXPECT_GE(t.at(c, a, n), 0.0);
                sum += t.at(c, a, n);
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
}

TEST(Table, GaussianCdfMatchesQuadratureAggregation) {
    // Same model treated as generic: per-cell quadrature of the truncated
    // density differs from CDF masses only by the tail mass assigned to edge
    // cells, so compare on a wide box where tails vanish.
    const double sigma = 0.4;
    const ExpFamilyModel g = make_gaussian_model((Mat(1, 2) << 0.5, 0.4).finished(), sigma,
                                                 Box::cube(1, -4, 4), scalar_actions({-1, 1}),
                                                 std::make_shared<TanhActionFeatures>(1, 1));
    ExpFamilyModel q = g;
    q.family = Family::Generic;
    const StateGrid grid = StateGrid::uniform(g.domain, 16);
    const TransitionTable tg = build_transition_table(g, g.W, grid);
    const TransitionTable tq = build_transition_table(q, q.W, grid, 64);
    double worst = 0.0;
    for (std::size_t i = 0; i < tg.prob.size(); ++i) worst = std::max(worst, std::abs(tg.prob[i] - tq.prob[i]));
    EXPECT_LT(worst, 1e-4);
}

TEST(Table, TwoDimensionalProductForm) {
    const ExpFamilyModel m = make_gaussian_model(Mat::Identity(2, 2) * 0.5, 0.5, Box::cube(2, -2, 2),
                                                 {Vec::Zero(2), Vec::Ones(2)},
                                                 std::make_shared<SumActionFeatures>(2));
    const StateGrid g(m.domain, {5, 4});
    const TransitionTable t = build_transition_table(m, m.W, g);
    double sum = 0.0;
    for (int n = 0; n < g.num_cells(); ++n) sum += t.at(7, 1, n);
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Dp, HorizonOneIsGreedyReward) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 11);
    RewardFn r = RewardFn::quadratic_target(v1(0.5), 4.0, 0.2);
    const PlannerResult p = dp_plan(m, g, r, 1);
    for (int c = 0; c < g.num_cells(); ++c) {
        double best = -1;
        int arg = -1;
        for (int a = 0; a < m.num_actions(); ++a) {
            const double v = r(g.center(c), m.actions[a]);
            if (v > best) best = v, arg = a;
        }
        EXPECT_EQ(p.value(0, c), best);
        EXPECT_EQ(p.policy.at(0, c), arg);
        EXPECT_EQ(p.value(1, c), 0.0);
    }
}

TEST(Dp, MatchesExhaustivePolicyEnumeration) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
        TransitionTable t;
        t.num_cells = 2;
        t.num_actions = 2;
        for (int i = 0; i < 4; ++i) {
            const double p = u(rng);
            t.prob.push_back(p);
            t.prob.push_back(1 - p);
        }
        std::vector<double> r(4);
        for (auto& x : r) x = u(rng);
        const PlannerResult dp = dp_solve(t, r, 2);

        for (int s1 = 0; s1 < 2; ++s1) {
            double best = -1.0;
            // policy bits: (h, cell) -> action
            for (int bits = 0; bits < 16; ++bits) {
                auto act = [&](int h, int c) { return (bits >> (2 * h + c)) & 1; };
                double v = 0.0;
                const int a0 = act(0, s1);
                v += r[s1 * 2 + a0];
                for (int c2 = 0; c2 < 2; ++c2) v += t.at(s1, a0, c2) * r[c2 * 2 + act(1, c2)];
                best = std::max(best, v);
            }
            EXPECT_NEAR(dp.value(0, s1), best, 1e-15);
        }
    }
}

TEST(Dp, TiesGoToLowestAction) {
    TransitionTable t;
    t.num_cells = 1;
    t.num_actions = 3;
    t.prob = {1, 1, 1};
    const PlannerResult p = dp_solve(t, {0.5, 0.5, 0.5}, 3);
    for (int h = 0; h < 3; ++h) EXPECT_EQ(p.policy.at(h, 0), 0);
}

TEST(Dp, DeterministicLimitFollowsCellImages) {
    // sigma tiny: every row is a point mass on cell_of(W phi(center, a)).
    const ExpFamilyModel m = benchmark_model(1e-9);
    const StateGrid g = StateGrid::uniform(m.domain, 25);
    const RewardFn r = target_reward();
    const int H = 4;
    const PlannerResult p = dp_plan(m, g, r, H);
    std::vector<double> V(g.num_cells(), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        std::vector<double> nv(g.num_cells());
        for (int c = 0; c < g.num_cells(); ++c) {
            double best = -1;
            for (int a = 0; a < m.num_actions(); ++a) {
                const Vec s = g.center(c);
                const int next = g.cell_of(m.W * m.features(s, a));
                best = std::max(best, r(s, m.actions[a]) + V[next]);
            }
            nv[c] = best;
        }
        V = nv;
    }
    for (int c = 0; c < g.num_cells(); ++c) EXPECT_NEAR(p.value(0, c), V[c], 1e-9);
}

TEST(Dp, ValuesBoundedAndConsistent) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 31);
    const int H = 5;
    const PlannerResult p = dp_plan(m, g, target_reward(), H);
    for (int h = 0; h <= H; ++h)
        for (int c = 0; c < g.num_cells(); ++c) {
            EXPECT_GE(p.value(h, c), 0.0);
            EXPECT_LE(p.value(h, c), H - h + 1e-12);
            if (h < H) {
                double mx = -1;
                for (int a = 0; a < m.num_actions(); ++a) mx = std::max(mx, p.q(h, c, a));
                EXPECT_EQ(p.value(h, c), mx);
                EXPECT_EQ(p.q(h, c, p.policy.at(h, c)), mx);
            }
        }
    // evaluating the greedy policy reproduces V
    const TransitionTable t = build_transition_table(m, m.W, g);
    const auto Vpi = evaluate_policy(t, reward_table(target_reward(), g, m.actions), p.policy);
    for (std::size_t i = 0; i < Vpi.size(); ++i) EXPECT_NEAR(Vpi[i], p.V[i], 1e-12);
}

TEST(Dp, MonotoneInTerminalValue) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 21);
    const TransitionTable t = build_transition_table(m, m.W, g);
    const auto r = reward_table(target_reward(), g, m.actions);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> lo(g.num_cells()), hi(g.num_cells());
    for (int c = 0; c < g.num_cells(); ++c) {
        lo[c] = u(rng);
        hi[c] = lo[c] + u(rng);
    }
    const PlannerResult a = dp_solve(t, r, 4, lo), b = dp_solve(t, r, 4, hi);
    for (std::size_t i = 0; i < a.V.size(); ++i) EXPECT_LE(a.V[i], b.V[i] + 1e-15);
}

TEST(Dp, GridRefinementGapShrinks) {
    const ExpFamilyModel m = benchmark_model();
    const RewardFn r = target_reward();
    StateGrid g = StateGrid::uniform(m.domain, 25);
    // V_1 integrated against a fixed smooth weight, so the comparison does not
    // depend on which cell a single point falls in.
    auto avg_value = [&](const StateGrid& grid) {
        const PlannerResult p = dp_plan(m, grid, r, 5);
        double acc = 0.0;
        for (int c = 0; c < grid.num_cells(); ++c) acc += p.value(0, c) * grid.width(0);
        return acc / 5.0;
    };
    std::vector<double> vals;
    for (int i = 0; i < 4; ++i) {
        vals.push_back(avg_value(g));
        g = g.refined();
    }
    const double d1 = std::abs(vals[1] - vals[0]), d2 = std::abs(vals[2] - vals[1]),
                 d3 = std::abs(vals[3] - vals[2]);
    EXPECT_LT(d2, d1);
    EXPECT_LT(d3, d2);
}

TEST(Dp, RejectsBadInputs) {
    TransitionTable t;
    t.num_cells = 1;
    t.num_actions = 1;
    t.prob = {1};
    EXPECT_THROW(dp_solve(t, {0.5}, 0), ArgumentError);
    EXPECT_THROW(dp_solve(t, {0.5, 0.1}, 1), ShapeError);
    RewardFn bad = target_reward();
    bad.target = v1(std::nan(""));
    const ExpFamilyModel m = benchmark_model();
    EXPECT_THROW(reward_table(bad, StateGrid::uniform(m.domain, 5), m.actions), DomainError);
}

TEST(Optimistic, SingletonEqualsDpPlan) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 31);
    const ConfidenceSet set = ConfidenceSet::singleton(m.W);
    Rng rng(4);
    const OptimisticResult o = optimistic_plan(set, m, g, target_reward(), 5, v1(-1.5), rng);
    const PlannerResult p = dp_plan(m, g, target_reward(), 5);
    EXPECT_EQ(o.plan.V, p.V);
    EXPECT_EQ(o.plan.policy.action, p.policy.action);
    EXPECT_EQ(o.chosen, 0);
    EXPECT_EQ(o.W_tilde, m.W);
}

TEST(Optimistic, AtLeastCenterAndInsideSet) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 31);
    const ConfidenceSet set = ConfidenceSet::ball((Mat(1, 2) << 0.3, 0.2).finished(), 1.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        OptimisticOptions opts;
        opts.n_candidates = 12;
        const OptimisticResult o = optimistic_plan(set, m, g, target_reward(), 5, v1(-1.5), rng, opts);
        EXPECT_GE(o.optimistic_value, o.candidate_values[0]);
        EXPECT_EQ(o.candidate_values.size(), 12u);
        EXPECT_TRUE(set.contains(o.W_tilde));
        EXPECT_EQ(o.optimistic_value, o.plan.value(0, g.cell_of(v1(-1.5))));
    }
}

TEST(Optimistic, DeterministicGivenRngState) {
    const ExpFamilyModel m = benchmark_model();
    const StateGrid g = StateGrid::uniform(m.domain, 21);
    const ConfidenceSet set = ConfidenceSet::ball(Mat::Zero(1, 2), 1.5);
    Rng a(9), b(9);
    const auto x = optimistic_plan(set, m, g, target_reward(), 3, v1(0.0), a);
    const auto y = optimistic_plan(set, m, g, target_reward(), 3, v1(0.0), b);
    EXPECT_EQ(x.W_tilde, y.W_tilde);
    EXPECT_EQ(x.candidate_values, y.candidate_values);
}

TEST(Optimistic, UnnormalizableCandidatesAreDropped) {
    // psi = (s', s'^2) with a huge radius: boundary candidates overflow the
    // kernel, the center still plans.
    auto phi = std::make_shared<FunctionActionFeatures>(
        1, 1, 1, [](const Vec&, const Vec&) { return v1(1.0); }, 1.0, "const");
    const ExpFamilyModel m = make_polynomial_model(2, 1.0, Mat::Zero(2, 1), Box::cube(1, -2, 2),
                                                   scalar_actions({0.0}), phi);
    const StateGrid g = StateGrid::uniform(m.domain, 8);
    const ConfidenceSet set = ConfidenceSet::ball(Mat::Zero(2, 1), 1e308);
    Rng rng(1);
    OptimisticOptions opts;
    opts.n_candidates = 4;
    const OptimisticResult o = optimistic_plan(set, m, g, RewardFn::quadratic_target(v1(0), 4.0), 2,
                                               v1(0.1), rng, opts);
    EXPECT_EQ(o.chosen, 0);
    EXPECT_EQ(o.dropped, 3);
    EXPECT_EQ(o.rejected, 3 * (opts.max_retries + 1));
    EXPECT_TRUE(std::isnan(o.candidate_values[1]));
}
