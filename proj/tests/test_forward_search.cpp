#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "test_models.hpp"
#include "vulcan/domains/fig2.hpp"
#include "vulcan/domains/random_ccmdp.hpp"
#include "vulcan/oracle.hpp"
#include "vulcan/planners/forward_search.hpp"
#include "vulcan/risk.hpp"

using namespace vulcan;
using vulcan::testing::chain_model;
using vulcan::testing::uniform_tree;

namespace {

// Test-side membership in the locally constrained class: every safe horizon
// history reached by the policy satisfies ser <= Delta(f).
template <class M>
bool respects_local_constraint(const M& m, const PolicyNode& node, const History<StateOf<M>>& h, Functional f) {
    if (h.t() >= m.horizon()) {
        double log_survival = 0.0;
        for (const auto& s : h.steps()) log_survival += std::log1p(-s.risk);
        const double ser = std::exp(-log_survival) - 1.0;
        const double x = f == Functional::G ? h.discounted_reward() : h.discounted_mean_reward();
        return ser <= RiskBound(m.risk_bound())(x) + 1e-12;
    }
    const auto outs = m.outcomes(h, *node.action);
    for (std::size_t i = 0; i < outs.safe.size(); ++i) {
        if (!respects_local_constraint(m, node.children[i], h.then(*node.action, static_cast<int>(i), outs), f)) {
            return false;
        }
    }
    return true;
}

domains::RandomCcmdp small_instance(std::uint64_t seed, double alpha) {
    domains::RandomCcmdpParams p;
    p.horizon = 1 + static_cast<int>(seed % 3);
    p.max_risk = 0.05;
    return domains::RandomCcmdp(seed, p, RiskBound::linear(alpha));
}

}  // namespace

TEST(VulcanFs, PenaltyExampleChoosesSecondAction) {
    const domains::Fig2Model m;
    const auto r = vulcanfs(m);
    ASSERT_TRUE(r.has_solution());
    EXPECT_EQ(r.policy.root.action, Action{1});
    EXPECT_DOUBLE_EQ(*r.root_value, 6.0);
    EXPECT_EQ(r.explored_history_count, 4u);
}

TEST(VulcanFs, SingleAction) {
    const auto m = chain_model({1.0}, {0.0});
    const auto r = vulcanfs(m);
    ASSERT_TRUE(r.has_solution());
    EXPECT_DOUBLE_EQ(*r.root_value, 1.0);
    EXPECT_TRUE(r.policy.complete());
}

TEST(VulcanFs, NoFeasiblePolicy) {
    const auto m = chain_model({1.0}, {0.5}, 1.0, RiskBound::constant(0.1));
    const auto r = vulcanfs(m);
    EXPECT_FALSE(r.has_solution());
    EXPECT_FALSE(r.policy.root.action.has_value());
}

TEST(VulcanFs, ZeroHorizon) {
    const auto m = chain_model({}, {});
    const auto r = vulcanfs(m);
    ASSERT_TRUE(r.has_solution());
    EXPECT_EQ(*r.root_value, 0.0);
    EXPECT_EQ(r.explored_history_count, 1u);
}

TEST(VulcanFs, ExploredCounts) {
    EXPECT_EQ(vulcanfs(chain_model({1, 1, 1}, {0, 0, 0})).explored_history_count, 4u);
    EXPECT_EQ(vulcanfs(uniform_tree(2, 2, 2)).explored_history_count, 1u + 4u + 16u);
    EXPECT_LE(static_cast<double>(vulcanfs(uniform_tree(3, 2, 3)).explored_history_count),
              1.0 + 6.0 + 36.0 + forward_search_bound(3, 2, 3));
}

TEST(VulcanFs, BudgetExceeded) {
    ForwardSearchOptions o;
    o.node_budget = 10;
    EXPECT_THROW(vulcanfs(uniform_tree(2, 2, 3), o), BudgetExceeded);
}

TEST(VulcanFs, TiesGoToFirstAction) {
    const auto r = vulcanfs(uniform_tree(3, 2, 2));
    ASSERT_TRUE(r.has_solution());
    EXPECT_EQ(r.policy.root.action, Action{0});
    for (const auto& c : r.policy.root.children) EXPECT_EQ(c.action, Action{0});
}

TEST(VulcanFs, ValueMatchesExactEvaluation) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto m = small_instance(seed, 0.01);
        const auto r = vulcanfs(m);
        if (!r.has_solution()) continue;
        EXPECT_TRUE(r.policy.complete());
        EXPECT_NEAR(*r.root_value, evaluate_policy(m, r.policy).expected_reward, 1e-9) << seed;
    }
}

TEST(VulcanFs, SoundForConcaveBounds) {
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
        const auto m = small_instance(seed, 0.002 + 0.0001 * static_cast<double>(seed % 50));
        const auto r = vulcanfs(m, Functional::F1);
        if (!r.has_solution()) continue;
        ++solved;
        const auto e = evaluate_policy(m, r.policy);
        EXPECT_LE(e.execution_risk, e.bound + 1e-9) << seed;
    }
    EXPECT_GT(solved, 50);
}

TEST(VulcanFs, OptimalWithinLocallyConstrainedClass) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto m = small_instance(seed, 0.004);
        if (count_policies(m) > 20'000) continue;
        for (Functional f : {Functional::F1, Functional::G}) {
            std::optional<double> best;
            for (const auto& p : enumerate_policies(m)) {
                if (!respects_local_constraint(m, p.root, root_history(m), f)) continue;
                const double v = evaluate_policy(m, p).expected_reward;
                if (!best || v > *best) best = v;
            }
            const auto r = vulcanfs(m, f);
            ASSERT_EQ(r.has_solution(), best.has_value()) << seed;
            if (best) {
                EXPECT_NEAR(*r.root_value, *best, 1e-9) << seed;
                EXPECT_TRUE(respects_local_constraint(m, r.policy.root, root_history(m), f));
            }
        }
    }
}

TEST(VulcanFs, DominatedByExactOptimum) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto m = small_instance(seed, 0.004);
        const auto r = vulcanfs(m);
        if (!r.has_solution()) continue;
        const auto opt = optimal_policy(m);
        ASSERT_TRUE(opt.has_value()) << seed;
        EXPECT_LE(*r.root_value, opt->evaluation.expected_reward + 1e-9) << seed;
    }
}

TEST(VulcanFs, Deterministic) {
    const auto m = small_instance(7, 0.004);
    const auto a = vulcanfs(m);
    const auto b = vulcanfs(m);
    EXPECT_EQ(a.policy.root, b.policy.root);
    EXPECT_EQ(a.root_value, b.root_value);
}
