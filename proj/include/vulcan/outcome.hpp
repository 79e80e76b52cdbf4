#pragma once

#include <compare>
#include <ostream>
#include <vector>

namespace vulcan {

/// Model-defined action identifier. Ordering between actions comes from the
/// order in which a model lists them, not from the id.
struct Action {
    int id = 0;

    friend constexpr auto operator<=>(const Action&, const Action&) = default;
    friend std::ostream& operator<<(std::ostream& os, Action a) { return os << a.id; }
};

template <class State>
struct Outcome {
    State state;
    double probability = 0.0;
    double reward = 0.0;
};

/**
 * Result of taking one action at one history.
 *
 * Failure states are lumped into a single terminal branch with probability
 * `failure_probability` and reward `failure_reward`. Safe probabilities plus
 * the failure probability sum to one.
 */
template <class State>
struct OutcomeSet {
    std::vector<Outcome<State>> safe;
    double failure_probability = 0.0;
    double failure_reward = 0.0;

    double total_probability() const {
        double sum = failure_probability;
        for (const auto& o : safe) sum += o.probability;
        return sum;
    }

    /// Expected immediate reward over every branch, failure included.
    double expected_reward() const {
        double sum = failure_probability * failure_reward;
        for (const auto& o : safe) sum += o.probability * o.reward;
        return sum;
    }
};

}  // namespace vulcan
