#include <gtest/gtest.h>

#include <numbers>

#include <cmath>
#include <limits>
#include <vector>

#include "test_models.hpp"
#include "vulcan/domains/fig2.hpp"
#include "vulcan/domains/random_ccmdp.hpp"
#include "vulcan/oracle.hpp"
#include "vulcan/planners/forward_search.hpp"
#include "vulcan/planners/mcts.hpp"

using namespace vulcan;
using vulcan::testing::chain_model;
using vulcan::testing::LambdaModel;

namespace {

SearchNode<int> node_with_arms(long visits, std::vector<std::pair<double, long>> arms) {
    SearchNode<int> n(History<int>::start(0, 1.0));
    n.visits = visits;
    int id = 0;
    for (auto [q, v] : arms) {
        SearchNode<int>::Arm a;
        a.action = Action{id++};
        a.q = q;
        a.visits = v;
        a.sampled = v > 0;
        n.arms.push_back(std::move(a));
    }
    return n;
}

VulcanOptions samples(std::uint64_t n, std::uint64_t seed = 0, Functional f = Functional::F1) {
    VulcanOptions o;
    o.budget = SampleBudget::samples(n);
    o.seed = seed;
    o.functional = f;
    return o;
}

domains::RandomCcmdp instance(std::uint64_t seed) {
    domains::RandomCcmdpParams p;
    p.horizon = 1 + static_cast<int>(seed % 3);
    p.max_risk = 0.05;
    return domains::RandomCcmdp(seed, p, RiskBound::linear(0.005));
}

// Action 0: reward 10 on a likely branch, reward 0 on a rare one, risk 0.01.
// Action 1: reward 1, no risk. Under f = g with Linear(0.01) the rare branch
// of action 0 violates the constraint.
LambdaModel rare_branch_model() {
    LambdaModel m;
    m.n = 1;
    m.bound = RiskBound::linear(0.01);
    m.actions_fn = [](const History<int>&) { return vulcan::testing::first_actions(2); };
    m.outcomes_fn = [](const History<int>&, Action a) {
        OutcomeSet<int> o;
        if (a.id == 0) {
            o.failure_probability = 0.01;
            o.safe.push_back({1, 0.989, 10.0});
            o.safe.push_back({2, 0.001, 0.0});
        } else {
            o.safe.push_back({3, 1.0, 1.0});
        }
        return o;
    };
    return m;
}

}  // namespace

TEST(Uct, ExploitsWithZeroConstant) {
    const auto n = node_with_arms(10, {{1.0, 5}, {0.5, 5}});
    EXPECT_EQ(uct_select(n, 0.0), 0u);
}

TEST(Uct, ExplorationBonusFavoursRareArm) {
    const auto n = node_with_arms(100, {{1.0, 99}, {0.9, 1}});
    // 1 + 2 sqrt(log 100 / 99) < 0.9 + 2 sqrt(log 100)
    EXPECT_EQ(uct_select(n, 2.0), 1u);
    EXPECT_EQ(uct_select(n, 0.0), 0u);
}

TEST(Uct, UnvisitedArmIsUnbounded) {
    const auto n = node_with_arms(10, {{5.0, 10}, {0.0, 0}});
    EXPECT_EQ(uct_select(n, std::numbers::sqrt2), 1u);
}

TEST(Uct, TiesGoToLowestIndex) {
    const auto n = node_with_arms(8, {{0.5, 4}, {0.5, 4}});
    EXPECT_EQ(uct_select(n, 1.0), 0u);
}

TEST(Uct, SkipsDeletedArms) {
    auto n = node_with_arms(10, {{5.0, 5}, {0.0, 5}});
    n.arms[0].deleted = true;
    EXPECT_EQ(uct_select(n, 1.0), 1u);
    n.arms[1].deleted = true;
    EXPECT_THROW(uct_select(n, 1.0), NoActions);
}

TEST(SampleBudgetParse, Forms) {
    EXPECT_EQ(SampleBudget::parse("samples:10").limit, 10.0);
    EXPECT_EQ(SampleBudget::parse("seconds:0.5").mode, SampleBudget::Mode::Seconds);
    for (const char* bad : {"samples", "samples:-1", "samples:1.5", "seconds:-1", "minutes:3", "samples:"}) {
        EXPECT_THROW(SampleBudget::parse(bad), InvalidConfig) << bad;
    }
}

TEST(Vulcan, PenaltyExampleChoosesSecondAction) {
    const domains::Fig2Model m;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = run_vulcan(m, samples(100, seed));
        ASSERT_TRUE(r.has_solution()) << seed;
        EXPECT_EQ(r.policy.root.action, Action{1}) << seed;
        EXPECT_DOUBLE_EQ(*r.root_value, 6.0);
        EXPECT_TRUE(r.complete);
    }
}

TEST(Vulcan, DeterministicChainIsExact) {
    const auto m = chain_model({1.0, 2.0, 0.5}, {0.0, 0.0, 0.0});
    const auto r = run_vulcan(m, samples(1));
    ASSERT_TRUE(r.has_solution());
    EXPECT_DOUBLE_EQ(*r.root_value, 3.5);
    EXPECT_TRUE(r.complete);
    EXPECT_TRUE(r.policy.complete());
    EXPECT_EQ(r.stats.samples, 1u);
    EXPECT_EQ(r.stats.max_depth, 3);
}

TEST(Vulcan, ZeroBudgetIsEmpty) {
    const auto r = run_vulcan(chain_model({1.0}, {0.0}), samples(0));
    EXPECT_EQ(r.status, VulcanResult::Status::Empty);
    EXPECT_FALSE(r.root_value.has_value());
    EXPECT_FALSE(r.policy.root.action.has_value());
}

TEST(Vulcan, InfeasibleModelHasNoSolution) {
    const auto m = chain_model({1.0}, {0.5}, 1.0, RiskBound::constant(0.1));
    const auto r = run_vulcan(m, samples(50));
    EXPECT_EQ(r.status, VulcanResult::Status::NoSolution);
    EXPECT_EQ(r.stats.deletions, 1u);
}

TEST(Vulcan, SecondsBudget) {
    VulcanOptions o;
    o.budget = SampleBudget::seconds(0.02);
    const auto r = run_vulcan(instance(2), o);
    EXPECT_GT(r.stats.samples, 0u);
    EXPECT_GE(r.stats.seconds, 0.02);
}

TEST(Vulcan, RejectsNegativeExploration) {
    VulcanOptions o;
    o.exploration = -1.0;
    EXPECT_THROW(run_vulcan(instance(0), o), InvalidConfig);
}

TEST(Vulcan, SameSeedSameResult) {
    const auto m = instance(5);
    const auto a = run_vulcan(m, samples(2000, 9));
    const auto b = run_vulcan(m, samples(2000, 9));
    EXPECT_EQ(a.policy.root, b.policy.root);
    EXPECT_EQ(a.root_value, b.root_value);
    EXPECT_EQ(a.stats.nodes, b.stats.nodes);
}

TEST(Vulcan, CountsStayConsistent) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto m = instance(seed);
        VulcanPlanner<domains::RandomCcmdp> planner(m, samples(0, seed));
        for (int i = 0; i < 500; ++i) {
            if (!planner.sample_once()) break;
            if (i % 97 == 0) {
                ASSERT_EQ(planner.count_inconsistencies(), 0u) << seed;
            }
        }
        EXPECT_EQ(planner.count_inconsistencies(), 0u) << seed;
        planner.cleanup();
        EXPECT_EQ(planner.count_inconsistencies(), 0u) << seed;
    }
}

TEST(Vulcan, BackupIsCountWeighted) {
    // one action, two safe outcomes of rewards 0 and 1 at t = 0, nothing after
    LambdaModel m;
    m.n = 1;
    m.actions_fn = [](const History<int>&) { return vulcan::testing::first_actions(1); };
    m.outcomes_fn = [](const History<int>&, Action) {
        OutcomeSet<int> o;
        o.safe.push_back({1, 0.25, 0.0});
        o.safe.push_back({2, 0.75, 1.0});
        return o;
    };
    VulcanPlanner<LambdaModel> planner(m, samples(0, 4));
    for (int i = 0; i < 400; ++i) planner.sample_once();
    const auto& arm = planner.root().arms[0];
    const long low = arm.children[0] ? arm.children[0]->visits : 0;
    const long high = arm.children[1] ? arm.children[1]->visits : 0;
    EXPECT_EQ(low + high, 400);
    EXPECT_DOUBLE_EQ(arm.q, static_cast<double>(high) / 400.0);
}

TEST(Vulcan, FailureDrawCountsAsVisit) {
    auto m = chain_model({2.0}, {0.5});
    auto base = m.outcomes_fn;
    m.outcomes_fn = [base](const History<int>& h, Action a) {
        auto o = base(h, a);
        o.failure_reward = 3.0;
        return o;
    };
    VulcanPlanner<LambdaModel> planner(m, samples(0, 1));
    for (int i = 0; i < 200; ++i) ASSERT_TRUE(planner.sample_once());
    const auto& arm = planner.root().arms[0];
    EXPECT_EQ(arm.visits, 200);
    EXPECT_GT(arm.failure_visits, 50);
    EXPECT_LT(arm.failure_visits, 150);
    const double expected = (2.0 * static_cast<double>(200 - arm.failure_visits) +
                             3.0 * static_cast<double>(arm.failure_visits)) / 200.0;
    EXPECT_DOUBLE_EQ(arm.q, expected);
}

TEST(Vulcan, CleanupRepairsUnsampledBranch) {
    const auto m = rare_branch_model();
    VulcanPlanner<LambdaModel> planner(m, samples(0, 3, Functional::G));
    for (int i = 0; i < 6; ++i) ASSERT_TRUE(planner.sample_once());
    const auto& root = planner.root();
    ASSERT_TRUE(root.policy.has_value());
    ASSERT_EQ(*root.policy, 0u);
    ASSERT_TRUE(root.arms[0].children[1] == nullptr);  // rare branch never drawn
    EXPECT_TRUE(planner.cleanup());
    ASSERT_TRUE(root.policy.has_value());
    EXPECT_EQ(*root.policy, 1u);
    EXPECT_TRUE(root.arms[0].deleted);
}

TEST(Vulcan, RunAppliesCleanup) {
    const auto m = rare_branch_model();
    const auto r = run_vulcan(m, samples(6, 3, Functional::G));
    ASSERT_TRUE(r.has_solution());
    EXPECT_EQ(r.policy.root.action, Action{1});
    EXPECT_TRUE(audit_policy(m, r.policy, Functional::G).empty());
}

TEST(Vulcan, AuditFlagsViolatingLeaf) {
    const auto m = rare_branch_model();
    PolicyTree p{PolicyNode{Action{0}, 0.0, 0, {PolicyNode{}, PolicyNode{}}}, 1};
    const auto bad = audit_policy(m, p, Functional::G);
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_EQ(bad[0], "0.1");
    EXPECT_TRUE(audit_policy(m, p, Functional::F1).empty());
}

TEST(Vulcan, ReturnedPoliciesPassAudit) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto m = instance(seed);
        for (std::uint64_t budget : {5u, 50u, 500u}) {
            const auto r = run_vulcan(m, samples(budget, seed));
            if (!r.has_solution()) continue;
            EXPECT_TRUE(audit_policy(m, r.policy, Functional::F1).empty()) << seed << " " << budget;
        }
    }
}

TEST(Vulcan, CompletePoliciesAreFeasible) {
    int complete = 0;
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
        const auto m = instance(seed);
        const auto r = run_vulcan(m, samples(3000, seed));
        if (!r.has_solution() || !r.complete) continue;
        ++complete;
        const auto e = evaluate_policy(m, r.policy);
        EXPECT_LE(e.execution_risk, e.bound + 1e-9) << seed;
    }
    EXPECT_GT(complete, 40);
}

TEST(Vulcan, ApproachesForwardSearchValue) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = instance(seed);
        const auto fs = vulcanfs(m);
        // rewards reach 10 per step, so the bonus is scaled to match
        auto o = samples(100'000, seed);
        o.exploration = 10.0 * m.horizon() * std::numbers::sqrt2;
        const auto r = run_vulcan(m, o);
        ASSERT_EQ(fs.has_solution(), r.has_solution()) << seed;
        if (!fs.has_solution()) continue;
        EXPECT_NEAR(*r.root_value, *fs.root_value, 0.02 * std::abs(*fs.root_value) + 1e-9) << seed;
    }
}

TEST(Vulcan, DefaultPolicyOnlySeesUntriedArms) {
    const auto m = vulcan::testing::uniform_tree(3, 1, 1);
    std::vector<std::size_t> sizes;
    DefaultPolicy<int> last = [&sizes](const History<int>&, std::span<const Action> remaining, Rng&) {
        sizes.push_back(remaining.size());
        return remaining.size() - 1;
    };
    VulcanPlanner<LambdaModel> planner(m, samples(0), last);
    for (int i = 0; i < 5; ++i) planner.sample_once();
    ASSERT_EQ(sizes.size(), 3u);
    EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 1}));
    EXPECT_EQ(planner.root().arms[2].visits + planner.root().arms[1].visits + planner.root().arms[0].visits, 5);
}
