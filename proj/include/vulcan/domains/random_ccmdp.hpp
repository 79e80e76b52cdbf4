#pragma once

#include <cstdint>
#include <vector>

#include "vulcan/history.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/risk_bound.hpp"
#include "vulcan/rng.hpp"

namespace vulcan::domains {

struct RandomCcmdpParams {
    int horizon = 3;
    int max_actions = 3;
    int max_outcomes = 3;
    double max_risk = 0.1;
    double max_reward = 10.0;
    double zero_risk_fraction = 0.25;  ///< share of (history, action) pairs with r = 0
    double discount = 1.0;
};

/**
 * Seeded random tree-structured CCMDP.
 *
 * Every quantity at a history is derived by hashing the instance seed with
 * the history's path id, so the model is pure and needs no stored tables.
 * Actions per history are drawn from 1..max_actions, safe outcomes per
 * action from 1..max_outcomes.
 */
class RandomCcmdp {
public:
    struct State {
        std::uint64_t id = 0;
        friend bool operator==(const State&, const State&) = default;
    };

    RandomCcmdp(std::uint64_t seed, RandomCcmdpParams params, RiskBound bound)
        : seed_(mix64(seed)), params_(params), bound_(bound) {}

    /// Instance with horizon/branching and Linear(alpha) bound drawn from `rng`
    /// within the limits of `limits`.
    static RandomCcmdp draw(Rng& rng, const RandomCcmdpParams& limits, double alpha_lo, double alpha_hi) {
        RandomCcmdpParams p = limits;
        p.horizon = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(limits.horizon)));
        p.max_actions = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(limits.max_actions)));
        p.max_outcomes = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(limits.max_outcomes)));
        const double alpha = rng.uniform(alpha_lo, alpha_hi);
        return RandomCcmdp(rng(), p, RiskBound::linear(alpha));
    }

    State initial_state() const { return State{seed_}; }
    int horizon() const { return params_.horizon; }
    double discount() const { return params_.discount; }
    RiskBound risk_bound() const { return bound_; }
    const RandomCcmdpParams& params() const { return params_; }

    std::vector<Action> actions(const History<State>& h) const {
        Rng rng(mix64(h.state().id ^ 0x5eedULL));
        const int count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params_.max_actions)));
        std::vector<Action> out;
        for (int i = 0; i < count; ++i) out.push_back(Action{i});
        return out;
    }

    OutcomeSet<State> outcomes(const History<State>& h, Action a) const {
        const std::uint64_t key = mix64(h.state().id * 31 + static_cast<std::uint64_t>(a.id) + 1);
        Rng rng(key);
        OutcomeSet<State> out;
        const double r = rng.uniform() < params_.zero_risk_fraction ? 0.0 : rng.uniform(0.0, params_.max_risk);
        const int count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params_.max_outcomes)));
        std::vector<double> weights;
        double total = 0.0;
        for (int i = 0; i < count; ++i) {
            weights.push_back(0.05 + rng.uniform());
            total += weights.back();
        }
        for (int i = 0; i < count; ++i) {
            const double p = (1.0 - r) * weights[static_cast<std::size_t>(i)] / total;
            out.safe.push_back({State{mix64(key + static_cast<std::uint64_t>(i) + 1)}, p,
                                rng.uniform(0.0, params_.max_reward)});
        }
        out.failure_probability = r;
        out.failure_reward = rng.uniform(0.0, params_.max_reward);
        return out;
    }

private:
    std::uint64_t seed_;
    RandomCcmdpParams params_;
    RiskBound bound_;
};

}  // namespace vulcan::domains
