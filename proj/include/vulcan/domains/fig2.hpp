#pragma once

#include <array>
#include <vector>

#include "vulcan/history.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/risk_bound.hpp"

namespace vulcan::domains {

/**
 * One-decision model where no penalty coefficient recovers the constrained
 * optimum. Three actions a1, a2, a3 (ids 0, 1, 2) with one safe outcome each:
 *
 *   a1: R = 5,  p_safe = 0.99
 *   a2: R = 6,  p_safe = 0.98
 *   a3: R = 10, p_safe = 0.95
 *
 * The failure branch of each action pays the same reward as its safe branch.
 */
class Fig2Model {
public:
    struct State {
        int id = 0;
        friend bool operator==(const State&, const State&) = default;
    };

    explicit Fig2Model(RiskBound bound = RiskBound::linear(0.004)) : bound_(bound) {}

    State initial_state() const { return {}; }
    int horizon() const { return 1; }
    double discount() const { return 1.0; }
    RiskBound risk_bound() const { return bound_; }

    std::vector<Action> actions(const History<State>& h) const {
        if (h.t() > 0) return {};
        return {Action{0}, Action{1}, Action{2}};
    }

    OutcomeSet<State> outcomes(const History<State>&, Action a) const {
        static constexpr std::array<double, 3> reward{5.0, 6.0, 10.0};
        static constexpr std::array<double, 3> risk{0.01, 0.02, 0.05};
        const auto i = static_cast<std::size_t>(a.id);
        OutcomeSet<State> out;
        out.safe.push_back({State{a.id + 1}, 1.0 - risk[i], reward[i]});
        out.failure_probability = risk[i];
        out.failure_reward = reward[i];
        return out;
    }

    static const char* action_name(Action a) {
        static constexpr std::array<const char*, 3> names{"a1", "a2", "a3"};
        return names.at(static_cast<std::size_t>(a.id));
    }

private:
    RiskBound bound_;
};

}  // namespace vulcan::domains
