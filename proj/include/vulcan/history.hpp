#pragma once

#include <cmath>
#include <concepts>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/outcome.hpp"

namespace vulcan {

/// Outcome index used for the lumped failure branch.
inline constexpr int kFailureOutcome = -1;

/// One transition of a history, summarized when the history is extended.
struct Step {
    Action action;
    int outcome = 0;           ///< index into OutcomeSet::safe, or kFailureOutcome
    double reward = 0.0;       ///< R(s_t, a_t, s_{t+1}) of the realized branch
    double risk = 0.0;         ///< r(s_t, a_t)
    double mean_reward = 0.0;  ///< E[R(s_t, a_t, S_{t+1})] over all branches
};

/**
 * Immutable, append-only state history h_{0:t}.
 *
 * Histories share their prefixes: extending a history allocates one node and
 * leaves the original untouched, so copies are cheap and safe to hand across
 * threads. Running sums for the discounted reward, the expected-reward
 * functional and the log survival probability are kept per node, making
 * g, f1 and ser O(1).
 */
template <class State>
class History {
    struct Node {
        std::shared_ptr<const Node> parent;
        std::optional<State> state;  // empty after a failure transition
        Step step;
        int t = 0;
        double discount = 1.0;
        double discount_power = 1.0;  // gamma^t
        double reward_sum = 0.0;
        double mean_reward_sum = 0.0;
        double log_survival = 0.0;    // sum of log(1 - r_i)
        bool failed = false;
        bool degenerate = false;      // some safe step had r_i = 1
    };

public:
    /// Empty-action history (s_0).
    static History start(State initial, double discount) {
        auto node = std::make_shared<Node>();
        node->state = std::move(initial);
        node->discount = discount;
        return History(std::move(node));
    }

    /**
     * Appends action `a` and the branch `outcome` of `outcomes`
     * (an index into outcomes.safe, or kFailureOutcome).
     */
    History then(Action a, int outcome, const OutcomeSet<State>& outcomes) const {
        if (failed()) throw Error("cannot extend a failing history");
        auto node = std::make_shared<Node>();
        const Node& p = *node_;
        node->parent = node_;
        node->t = p.t + 1;
        node->discount = p.discount;
        node->discount_power = p.discount_power * p.discount;
        node->step.action = a;
        node->step.outcome = outcome;
        node->step.risk = outcomes.failure_probability;
        node->step.mean_reward = outcomes.expected_reward();
        if (outcome == kFailureOutcome) {
            node->step.reward = outcomes.failure_reward;
            node->failed = true;
        } else {
            const auto& o = outcomes.safe.at(static_cast<std::size_t>(outcome));
            node->step.reward = o.reward;
            node->state = o.state;
        }
        node->reward_sum = p.reward_sum + p.discount_power * node->step.reward;
        node->mean_reward_sum = p.mean_reward_sum + p.discount_power * node->step.mean_reward;
        node->log_survival = p.log_survival + std::log1p(-node->step.risk);
        node->degenerate = p.degenerate || (!node->failed && node->step.risk >= 1.0);
        return History(std::move(node));
    }

    /// Number of actions taken.
    int t() const { return node_->t; }
    bool failed() const { return node_->failed; }
    double discount() const { return node_->discount; }

    /// Last state of a safe history.
    const State& state() const {
        if (!node_->state) throw Error("failing history has no terminal safe state");
        return *node_->state;
    }

    /// Last step; requires t() > 0.
    const Step& last_step() const {
        if (t() == 0) throw Error("empty history has no steps");
        return node_->step;
    }

    /// History without its last step; requires t() > 0.
    History parent() const {
        if (t() == 0) throw Error("empty history has no parent");
        return History(node_->parent);
    }

    /// Steps in chronological order.
    std::vector<Step> steps() const {
        std::vector<Step> out(static_cast<std::size_t>(t()));
        const Node* n = node_.get();
        for (int i = t() - 1; i >= 0; --i, n = n->parent.get()) out[static_cast<std::size_t>(i)] = n->step;
        return out;
    }

    /// Safe states s_0 .. s_t (s_t omitted for failing histories).
    std::vector<State> states() const {
        std::vector<State> out;
        for (const Node* n = node_.get(); n; n = n->parent.get()) {
            if (n->state) out.push_back(*n->state);
        }
        return {out.rbegin(), out.rend()};
    }

    double discounted_reward() const { return node_->reward_sum; }
    double discounted_mean_reward() const { return node_->mean_reward_sum; }
    double log_survival() const { return node_->log_survival; }
    bool degenerate() const { return node_->degenerate; }

    /// Path key: action ids and outcome indices alternating, dot separated,
    /// e.g. "0.1.2.0"; the failure branch renders as "f"; the root is "".
    std::string key() const {
        std::string out;
        for (const Step& s : steps()) {
            if (!out.empty()) out += '.';
            out += std::to_string(s.action.id);
            out += '.';
            out += s.outcome == kFailureOutcome ? std::string("f") : std::to_string(s.outcome);
        }
        return out;
    }

    friend bool operator==(const History& a, const History& b) {
        if (a.node_ == b.node_) return true;
        if (a.t() != b.t() || a.failed() != b.failed()) return false;
        const Node* x = a.node_.get();
        const Node* y = b.node_.get();
        for (; x && y; x = x->parent.get(), y = y->parent.get()) {
            if (x->t > 0 && (x->step.action != y->step.action || x->step.outcome != y->step.outcome)) {
                return false;
            }
            if constexpr (std::equality_comparable<State>) {
                if (x->state != y->state) return false;
            }
        }
        return true;
    }

private:
    explicit History(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

}  // namespace vulcan
