#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/history.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/risk_bound.hpp"

namespace vulcan::domains {

/// Two-point reward machine with a two-point belief over its bias.
struct MachineParams {
    double reward_low = 0.0;   ///< R1, paid with probability p
    double reward_high = 0.0;  ///< R2, paid with probability 1 - p
    double p1 = 0.0;
    double p2 = 0.0;
    double theta0 = 0.5;       ///< prior P[p = p1]
    double risk = 0.0;         ///< failure probability per play
};

/// The three machines used in the bandit experiments.
inline std::vector<MachineParams> table1_machines() {
    return {
        {0.0, 1.0, 0.3, 0.7, 0.5, 0.001},
        {0.2, 0.5, 0.2, 0.5, 0.6, 0.0005},
        {0.4, 0.6, 0.3, 0.6, 0.3, 0.0015},
    };
}

inline std::vector<MachineParams> machine_preset(const std::string& name) {
    if (name == "table1") return table1_machines();
    throw InvalidConfig("unknown machine preset '" + name + "'");
}

/// P[R | p] for R in {R1, R2}.
inline double reward_likelihood(double p, bool low) { return low ? p : 1.0 - p; }

/// Marginal P[R | theta] = P[R|p1] theta + P[R|p2] (1 - theta).
inline double marginal_likelihood(const MachineParams& m, double theta, bool low) {
    return reward_likelihood(m.p1, low) * theta + reward_likelihood(m.p2, low) * (1.0 - theta);
}

/// Posterior belief P[p = p1] after observing `observed_reward`.
inline double bandit_update(double theta, const MachineParams& m, double observed_reward) {
    bool low;
    if (observed_reward == m.reward_low) {
        low = true;
    } else if (observed_reward == m.reward_high) {
        low = false;
    } else {
        throw UnknownReward("reward " + std::to_string(observed_reward) + " is not an outcome of this machine");
    }
    const double num = reward_likelihood(m.p1, low) * theta;
    const double den = num + reward_likelihood(m.p2, low) * (1.0 - theta);
    if (den <= 0.0) return theta;  // impossible observation under the belief
    return num / den;
}

/**
 * Bayesian multi-armed bandit as a chance-constrained MDP.
 *
 * Actions: 0..k-1 play machine i, k ends the game, k+1 is the no-op that is
 * the only action once the game has ended. Ending at time t pays
 * 0.25 (n - t) at once, undiscounted. A failed play pays nothing and ends the
 * mission.
 */
class BanditModel {
public:
    struct State {
        std::vector<double> theta;
        bool ended = false;
        friend bool operator==(const State&, const State&) = default;
    };

    BanditModel(std::vector<MachineParams> machines, int horizon, double discount, RiskBound bound,
                double end_reward_per_step = 0.25)
        : machines_(std::move(machines)),
          horizon_(horizon),
          discount_(discount),
          bound_(bound),
          end_reward_(end_reward_per_step) {
        if (machines_.empty()) throw InvalidConfig("bandit needs at least one machine");
        if (horizon_ < 0) throw InvalidConfig("horizon must be nonnegative");
        for (const auto& m : machines_) {
            for (double p : {m.p1, m.p2, m.theta0, m.risk}) {
                if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("machine probabilities must lie in [0,1]");
            }
        }
    }

    State initial_state() const {
        State s;
        for (const auto& m : machines_) s.theta.push_back(m.theta0);
        return s;
    }
    int horizon() const { return horizon_; }
    double discount() const { return discount_; }
    RiskBound risk_bound() const { return bound_; }
    const std::vector<MachineParams>& machines() const { return machines_; }

    Action end_action() const { return Action{static_cast<int>(machines_.size())}; }
    Action noop_action() const { return Action{static_cast<int>(machines_.size()) + 1}; }

    std::vector<Action> actions(const History<State>& h) const {
        if (h.state().ended) return {noop_action()};
        std::vector<Action> out;
        for (int i = 0; i <= static_cast<int>(machines_.size()); ++i) out.push_back(Action{i});
        return out;
    }

    OutcomeSet<State> outcomes(const History<State>& h, Action a) const {
        const State& s = h.state();
        OutcomeSet<State> out;
        if (a == noop_action() || a == end_action()) {
            State next = s;
            next.ended = true;
            const double reward = a == end_action() ? end_reward_ * (horizon_ - h.t()) : 0.0;
            out.safe.push_back({std::move(next), 1.0, reward});
            return out;
        }
        const auto i = static_cast<std::size_t>(a.id);
        const MachineParams& m = machines_.at(i);
        out.failure_probability = m.risk;
        out.failure_reward = 0.0;
        for (bool low : {true, false}) {
            const double p = marginal_likelihood(m, s.theta[i], low) * (1.0 - m.risk);
            if (p <= 0.0) continue;
            const double reward = low ? m.reward_low : m.reward_high;
            State next = s;
            next.theta[i] = bandit_update(s.theta[i], m, reward);
            out.safe.push_back({std::move(next), p, reward});
        }
        return out;
    }

    std::string action_name(Action a) const {
        if (a == end_action()) return "end";
        if (a == noop_action()) return "noop";
        return "machine" + std::to_string(a.id + 1);
    }

private:
    std::vector<MachineParams> machines_;
    int horizon_;
    double discount_;
    RiskBound bound_;
    double end_reward_;
};

inline BanditModel bandit_model(std::vector<MachineParams> machines, int horizon, double discount,
                                RiskBound bound) {
    return BanditModel(std::move(machines), horizon, discount, bound);
}

}  // namespace vulcan::domains
