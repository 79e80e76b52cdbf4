#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "vulcan/domains/collision.hpp"
#include "vulcan/domains/gauss_hermite.hpp"
#include "vulcan/domains/gp.hpp"
#include "vulcan/model.hpp"
#include "vulcan/rng.hpp"

using namespace vulcan;
using namespace vulcan::domains;

namespace {

// E[X^k] for X ~ N(mean, var) by the binomial expansion of standard moments.
double gaussian_moment(double mean, double var, int k) {
    double total = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
        if (j > 0) binom = binom * (k - j + 1) / j;
        if (j % 2 == 1) continue;
        double odd_factorial = 1.0;  // (j-1)!!
        for (int i = j - 1; i > 1; i -= 2) odd_factorial *= i;
        total += binom * std::pow(mean, k - j) * std::pow(var, j / 2.0) * odd_factorial;
    }
    return total;
}

History<GpExplorationModel::State> step(const GpExplorationModel& m, const History<GpExplorationModel::State>& h,
                                        int move, int outcome = 0) {
    return h.then(Action{move}, outcome, m.outcomes(h, Action{move}));
}

}  // namespace

TEST(GaussHermite, DegreeFourNodesAndProbabilities) {
    const auto q = gauss_hermite_outcomes(0.0, 1.0, 4);
    ASSERT_EQ(q.size(), 4u);
    // standard normal nodes are sqrt(2) times the Hermite roots
    EXPECT_NEAR(q[0].value, -std::numbers::sqrt2 * 1.6506801238857846, 1e-12);
    EXPECT_NEAR(q[1].value, -std::numbers::sqrt2 * 0.5246476232752903, 1e-12);
    EXPECT_NEAR(q[2].value, std::numbers::sqrt2 * 0.5246476232752903, 1e-12);
    EXPECT_NEAR(q[3].value, std::numbers::sqrt2 * 1.6506801238857846, 1e-12);
    EXPECT_NEAR(q[3].value, 2.33441, 1e-5);
    EXPECT_NEAR(q[2].value, 0.74196, 1e-5);
    EXPECT_NEAR(q[1].probability, 0.45412, 1e-5);
    EXPECT_NEAR(q[0].probability, 0.04588, 1e-5);
    EXPECT_NEAR(q[0].probability, q[3].probability, 1e-14);
    EXPECT_NEAR(q[1].probability, q[2].probability, 1e-14);
}

TEST(GaussHermite, IntegratesDegreeSevenExactly) {
    for (double mean : {0.0, 1.3, -0.4}) {
        for (double var : {1.0, 0.16, 0.02}) {
            const auto q = gauss_hermite_outcomes(mean, var, 4);
            double sum = 0.0;
            for (const auto& p : q) sum += p.probability;
            EXPECT_NEAR(sum, 1.0, 1e-12);
            for (int k = 1; k <= 7; ++k) {
                double approx = 0.0;
                for (const auto& p : q) approx += p.probability * std::pow(p.value, k);
                EXPECT_NEAR(approx, gaussian_moment(mean, var, k), 1e-9) << mean << " " << var << " " << k;
            }
        }
    }
}

TEST(GaussHermite, DegreeEightIsNotExact) {
    const auto q = gauss_hermite_outcomes(0.0, 1.0, 4);
    double m8 = 0.0;
    for (const auto& p : q) m8 += p.probability * std::pow(p.value, 8);
    EXPECT_GT(std::abs(m8 - 105.0), 1.0);
}

TEST(GaussHermite, EdgeCases) {
    const auto point = gauss_hermite_outcomes(2.5, 0.0);
    ASSERT_EQ(point.size(), 1u);
    EXPECT_EQ(point[0].value, 2.5);
    EXPECT_EQ(point[0].probability, 1.0);
    EXPECT_THROW(gauss_hermite_outcomes(0.0, -1.0), InvalidConfig);
    EXPECT_THROW(gauss_hermite_outcomes(0.0, 1.0, 0), InvalidConfig);
    EXPECT_EQ(gauss_hermite_outcomes(0.0, 1.0, 7).size(), 7u);
}

TEST(GpPosterior, Prior) {
    const GpHyperparameters hyper;
    const auto p = gp_posterior(hyper, {}, {0.0, 0.0});
    EXPECT_DOUBLE_EQ(p.mean, 1.0);
    EXPECT_DOUBLE_EQ(p.variance, 0.16);
    EXPECT_DOUBLE_EQ(gp_posterior(hyper, {}, {2.0, 4.0}).mean, 1.0 + 0.05 * 2.0 + 0.05 * 4.0);
}

TEST(GpPosterior, InterpolatesObservations) {
    const GpHyperparameters hyper;
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<GpObservation> obs;
        const int count = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < count; ++i) {
            obs.push_back({{static_cast<double>(i), static_cast<double>(rng.below(6))}, rng.uniform(0.0, 2.0)});
        }
        for (const auto& o : obs) {
            const auto p = gp_posterior(hyper, obs, o.location);
            EXPECT_NEAR(p.mean, o.value, 1e-6);
            EXPECT_LE(p.variance, 1e-6);
        }
    }
}

TEST(GpPosterior, SymmetricObservations) {
    const GpHyperparameters hyper;
    const Vec2 q{2.0, 2.0};
    const Vec2 a{1.0, 2.0}, b{3.0, 2.0};
    const double v = 0.3;
    // deviations +v and -v from the prior mean at mirror-image points
    std::vector<GpObservation> obs{{a, hyper.mean(a) + v}, {b, hyper.mean(b) - v}};
    EXPECT_NEAR(gp_posterior(hyper, obs, q).mean, hyper.mean(q), 1e-12);
}

TEST(GpPosterior, VarianceNonincreasingInObservations) {
    const GpHyperparameters hyper;
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<GpObservation> obs;
        const Vec2 query{rng.uniform(0.0, 6.0), rng.uniform(0.0, 6.0)};
        double previous = gp_posterior(hyper, obs, query).variance;
        for (int i = 0; i < 6; ++i) {
            obs.push_back({{static_cast<double>(i), static_cast<double>(rng.below(6))}, rng.uniform()});
            const double v = gp_posterior(hyper, obs, query).variance;
            EXPECT_LE(v, previous + 1e-12);
            previous = v;
        }
    }
}

TEST(GpPosterior, DuplicateLocationsWithoutJitterAreSingular) {
    GpHyperparameters hyper;
    hyper.jitter = 0.0;
    std::vector<GpObservation> obs{{{1.0, 1.0}, 1.0}, {{1.0, 1.0}, 1.0}};
    EXPECT_THROW(gp_posterior(hyper, obs, {0.0, 0.0}), SingularKernel);
}

TEST(Collision, BoundaryIsOneHalf) {
    const Obstacle o{{1.0, 1.0}, {2.0, 2.0}};
    EXPECT_NEAR(obstacle_risk({0.0, 1.5}, Cov2::diagonal(0.5), o), normal_upper_tail(1.0 / std::sqrt(0.5)), 1e-15);
    EXPECT_NEAR(obstacle_risk({1.0, 1.5}, Cov2::diagonal(0.5), o), 0.5, 1e-15);
    EXPECT_NEAR(obstacle_risk({1.0, 1.5}, Cov2{0.3, 0.1, 0.7}, o), 0.5, 1e-15);
}

TEST(Collision, FarAwayIsNegligible) {
    const std::vector<Obstacle> obs{{{10.0, 10.0}, {11.0, 11.0}}};
    EXPECT_LE(collision_risk({0.0, 0.0}, Cov2::diagonal(0.01), obs), 1e-20);
}

TEST(Collision, SumIsClamped) {
    // each obstacle's nearest edge is 0.2533 sigma away: tail ~0.4, two of them sum to ~0.8;
    // three clamp at 1
    const double d = 0.2533471031357997;
    const std::vector<Obstacle> obs{
        {{d, -1.0}, {d + 1.0, 1.0}}, {{-d - 1.0, -1.0}, {-d, 1.0}}, {{-1.0, d}, {1.0, d + 1.0}}};
    const double per = normal_upper_tail(d);
    EXPECT_NEAR(per, 0.4, 1e-9);
    EXPECT_NEAR(collision_risk({0.0, 0.0}, Cov2::diagonal(1.0), std::span(obs).first(2)), 2 * per, 1e-12);
    EXPECT_EQ(collision_risk({0.0, 0.0}, Cov2::diagonal(1.0), obs), 1.0);
}

TEST(Collision, MinimumOverFacingEdges) {
    const Obstacle o{{1.0, 1.0}, {2.0, 2.0}};
    // diagonal approach: x gap 0.5, y gap 1.0, so the y edge is farther and less likely
    const Vec2 mean{0.5, 0.0};
    const auto cov = Cov2::diagonal(0.25);
    EXPECT_NEAR(obstacle_risk(mean, cov, o), normal_upper_tail(1.0 / 0.5), 1e-15);
}

TEST(Collision, Errors) {
    const std::vector<Obstacle> obs{{{1.0, 1.0}, {2.0, 2.0}}};
    EXPECT_THROW(collision_risk({1.5, 1.5}, Cov2::diagonal(0.1), obs), MeanInsideObstacle);
    EXPECT_THROW(collision_risk({0.0, 0.0}, Cov2{1.0, 2.0, 1.0}, obs), InvalidConfig);
}

TEST(Collision, MonotoneInCovarianceScale) {
    Rng rng(99);
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Obstacle> obs;
        const int count = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < count; ++i) {
            const Vec2 lo{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
            obs.push_back({lo, {lo[0] + rng.uniform(0.1, 2.0), lo[1] + rng.uniform(0.1, 2.0)}});
        }
        const Vec2 mean{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
        bool inside = false;
        for (const auto& o : obs) inside = inside || o.contains_strictly(mean);
        if (inside) continue;
        const double a = rng.uniform(0.01, 1.0), b = rng.uniform(0.01, 1.0);
        const double rho = rng.uniform(-0.9, 0.9);
        const Cov2 cov{a, rho * std::sqrt(a * b), b};
        const double lambda = 1.0 + rng.uniform(0.0, 4.0);
        EXPECT_GE(collision_risk(mean, cov * lambda, obs), collision_risk(mean, cov, obs) - 1e-15);
        ++checked;
    }
    EXPECT_GT(checked, 300);
}

TEST(GpModel, DefaultObstacles) {
    const auto obs = default_gp_obstacles(6, 6);
    ASSERT_EQ(obs.size(), 2u);
    const std::vector<Vec2> expected{{2.2, -0.5}, {2.8, 2.8}, {2.2, 4.2}, {2.8, 5.5}};
    const std::vector<Vec2> got{obs[0].lo, obs[0].hi, obs[1].lo, obs[1].hi};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_DOUBLE_EQ(got[i][0], expected[i][0]);
        EXPECT_DOUBLE_EQ(got[i][1], expected[i][1]);
    }
    EXPECT_TRUE(default_gp_obstacles(2, 6).empty());
}

TEST(GpModel, CornerHasThreeActions) {
    GpExplorationConfig c;
    c.obstacles = {};
    const GpExplorationModel m(c);
    const auto actions = m.actions(root_history(m));
    EXPECT_EQ(actions, (std::vector<Action>{Action{0}, Action{1}, Action{2}}));
    EXPECT_EQ(m.action_name(Action{1}), "NE");
}

TEST(GpModel, InitialStateHoldsStartMeasurement) {
    const auto m = gp_exploration_model(default_gp_config());
    const auto s = m.initial_state();
    ASSERT_EQ(s.observations.size(), 1u);
    EXPECT_DOUBLE_EQ(s.observations[0].value, 1.0);
    auto c = default_gp_config();
    c.initial_measurement = 1.7;
    EXPECT_EQ(GpExplorationModel(c).initial_state().observations[0].value, 1.7);
}

TEST(GpModel, OutcomesFollowPosterior) {
    const auto m = gp_exploration_model(default_gp_config());
    const auto root = root_history(m);
    const auto outs = m.outcomes(root, Action{0});  // east to (1, 0)
    ASSERT_EQ(outs.safe.size(), 4u);
    const auto prior = m.initial_state().observations;
    const auto pred = gp_posterior(m.config().hyper, prior, {1.0, 0.0});
    const auto q = gauss_hermite_outcomes(pred.mean, pred.variance);
    const double risk = collision_risk({1.0, 0.0}, m.covariance(1), m.config().obstacles);
    EXPECT_EQ(outs.failure_probability, risk);
    EXPECT_EQ(m.covariance(1).xx, 0.005 + 0.0001);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(outs.safe[i].reward, q[i].value, 1e-15);
        EXPECT_NEAR(outs.safe[i].probability, (1.0 - risk) * q[i].probability, 1e-15);
        EXPECT_EQ(outs.safe[i].state.observations.size(), 2u);
        EXPECT_EQ(outs.safe[i].state.t, 1);
    }
    EXPECT_TRUE(validate_model(m, 2).empty());
}

TEST(GpModel, RiskGrowsNearObstacle) {
    const auto m = gp_exploration_model(default_gp_config());
    auto h = root_history(m);
    h = step(m, h, 0);  // (1, 0)
    const double near = m.outcomes(h, Action{0}).failure_probability;  // to (2, 0), beside the wall
    const double far = m.outcomes(h, Action{2}).failure_probability;   // to (1, 1)
    EXPECT_GT(near, far);
    EXPECT_GT(near, 1e-4);
}

TEST(GpModel, RevisitPaysNothing) {
    const auto m = gp_exploration_model(default_gp_config());
    auto h = root_history(m);
    h = step(m, h, 0, 2);  // east
    const auto back = m.outcomes(h, Action{4});  // west, back to the start
    ASSERT_EQ(back.safe.size(), 1u);
    EXPECT_EQ(back.safe[0].reward, 0.0);
    EXPECT_EQ(back.safe[0].state.observations, h.state().observations);
}

TEST(GpModel, ObstacleCellsAreUnavailable) {
    auto c = default_gp_config();
    c.obstacles = {Obstacle{{0.5, 0.5}, {1.5, 1.5}}};
    const GpExplorationModel m(c);
    EXPECT_TRUE(m.blocked({1, 1}));
    EXPECT_EQ(m.actions(root_history(m)), (std::vector<Action>{Action{0}, Action{2}}));
    EXPECT_THROW(m.outcomes(root_history(m), Action{1}), InvalidConfig);
    EXPECT_THROW(m.outcomes(root_history(m), Action{5}), InvalidConfig);
}

TEST(GpModel, OutcomesArePure) {
    const auto m = gp_exploration_model(default_gp_config());
    auto h = step(m, step(m, root_history(m), 2, 1), 1, 3);
    for (Action a : m.actions(h)) {
        const auto x = m.outcomes(h, a);
        const auto y = m.outcomes(h, a);
        ASSERT_EQ(x.safe.size(), y.safe.size());
        EXPECT_EQ(x.failure_probability, y.failure_probability);
        for (std::size_t i = 0; i < x.safe.size(); ++i) {
            EXPECT_EQ(x.safe[i].probability, y.safe[i].probability);
            EXPECT_EQ(x.safe[i].reward, y.safe[i].reward);
            EXPECT_EQ(x.safe[i].state, y.safe[i].state);
        }
    }
}

TEST(GpModel, InvalidConfigs) {
    auto c = default_gp_config();
    c.start = {9, 0};
    EXPECT_THROW(GpExplorationModel{c}, InvalidConfig);
    c = default_gp_config();
    c.sigma0 = 0.0;
    EXPECT_THROW(GpExplorationModel{c}, InvalidConfig);
    c = default_gp_config();
    c.obstacles.push_back({{-0.5, -0.5}, {0.5, 0.5}});
    EXPECT_THROW(GpExplorationModel{c}, InvalidConfig);
    c = default_gp_config();
    c.obstacles.push_back({{1.0, 1.0}, {1.0, 2.0}});
    EXPECT_THROW(GpExplorationModel{c}, InvalidConfig);
    c = default_gp_config();
    c.width = 0;
    EXPECT_THROW(GpExplorationModel{c}, InvalidConfig);
}
