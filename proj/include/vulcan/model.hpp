#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/history.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/risk_bound.hpp"

namespace vulcan {

/**
 * Behavioral contract of a finite-horizon chance-constrained MDP.
 *
 * Failure states are not enumerated: each (history, action) pair reports a
 * lumped failure probability and the reward of entering failure. actions() and
 * outcomes() must be pure functions of their arguments.
 */
template <class M>
concept CcmdpModel = requires(const M& m, const History<typename M::State>& h, Action a) {
    typename M::State;
    { m.initial_state() } -> std::convertible_to<typename M::State>;
    { m.horizon() } -> std::convertible_to<int>;
    { m.discount() } -> std::convertible_to<double>;
    { m.risk_bound() } -> std::convertible_to<RiskBound>;
    { m.actions(h) } -> std::convertible_to<std::vector<Action>>;
    { m.outcomes(h, a) } -> std::convertible_to<OutcomeSet<typename M::State>>;
};

template <CcmdpModel M>
using StateOf = typename M::State;

template <CcmdpModel M>
History<StateOf<M>> root_history(const M& model) {
    return History<StateOf<M>>::start(model.initial_state(), model.discount());
}

/// Tolerance on probability sums.
inline constexpr double kProbabilityTolerance = 1e-9;

struct ModelViolation {
    enum class Kind { ProbabilitySum, RiskRange, ProbabilityRange, MissingOutcomes, Nondeterministic };
    Kind kind;
    std::string history_key;
    Action action;
    std::string detail;
};

inline const char* to_string(ModelViolation::Kind k) {
    switch (k) {
        case ModelViolation::Kind::ProbabilitySum: return "probability-sum";
        case ModelViolation::Kind::RiskRange: return "risk-range";
        case ModelViolation::Kind::ProbabilityRange: return "probability-range";
        case ModelViolation::Kind::MissingOutcomes: return "missing-outcomes";
        case ModelViolation::Kind::Nondeterministic: return "nondeterministic";
    }
    return "unknown";
}

namespace detail {

template <class State>
bool same_outcomes(const OutcomeSet<State>& a, const OutcomeSet<State>& b) {
    if (a.safe.size() != b.safe.size() || a.failure_probability != b.failure_probability ||
        a.failure_reward != b.failure_reward) {
        return false;
    }
    for (std::size_t i = 0; i < a.safe.size(); ++i) {
        if (a.safe[i].probability != b.safe[i].probability || a.safe[i].reward != b.safe[i].reward) {
            return false;
        }
        if constexpr (std::equality_comparable<State>) {
            if (!(a.safe[i].state == b.safe[i].state)) return false;
        }
    }
    return true;
}

template <CcmdpModel M>
void validate_walk(const M& model, const History<StateOf<M>>& h, int max_depth, std::size_t& budget,
                   std::size_t limit, std::vector<ModelViolation>& out) {
    if (budget == 0) throw BudgetExceeded("validate_model visited too many histories", limit);
    --budget;
    if (h.t() >= max_depth) return;
    const std::vector<Action> actions = model.actions(h);
    if (std::vector<Action>(model.actions(h)) != actions) {
        out.push_back({ModelViolation::Kind::Nondeterministic, h.key(), Action{}, "actions() disagree"});
    }
    for (Action a : actions) {
        const OutcomeSet<StateOf<M>> outs = model.outcomes(h, a);
        bool ok = true;
        auto report = [&](ModelViolation::Kind kind, std::string detail) {
            out.push_back({kind, h.key(), a, std::move(detail)});
            ok = false;
        };
        if (!detail::same_outcomes(outs, OutcomeSet<StateOf<M>>(model.outcomes(h, a)))) {
            report(ModelViolation::Kind::Nondeterministic, "outcomes() disagree between calls");
        }
        const double r = outs.failure_probability;
        if (!(r >= 0.0 && r <= 1.0)) report(ModelViolation::Kind::RiskRange, "r=" + std::to_string(r));
        for (const auto& o : outs.safe) {
            if (!(o.probability > 0.0 && o.probability <= 1.0)) {
                report(ModelViolation::Kind::ProbabilityRange, "p=" + std::to_string(o.probability));
            }
        }
        const double total = outs.total_probability();
        if (!(std::abs(total - 1.0) <= kProbabilityTolerance)) {
            report(ModelViolation::Kind::ProbabilitySum, "sum=" + std::to_string(total));
        }
        if (outs.safe.empty() && r < 1.0) {
            report(ModelViolation::Kind::MissingOutcomes, "no safe outcomes with r<1");
        }
        if (!ok) continue;
        for (std::size_t i = 0; i < outs.safe.size(); ++i) {
            validate_walk(model, h.then(a, static_cast<int>(i), outs), max_depth, budget, limit, out);
        }
    }
}

template <CcmdpModel M>
std::size_t count_walk(const M& model, const History<StateOf<M>>& h, std::size_t& budget,
                       std::size_t limit) {
    if (budget == 0) throw BudgetExceeded("history count exceeds node budget", limit);
    --budget;
    std::size_t count = 1;
    if (h.t() >= model.horizon()) return count;
    for (Action a : model.actions(h)) {
        const auto outs = model.outcomes(h, a);
        for (std::size_t i = 0; i < outs.safe.size(); ++i) {
            count += count_walk(model, h.then(a, static_cast<int>(i), outs), budget, limit);
        }
    }
    return count;
}

}  // namespace detail

/**
 * Exhaustively walks safe histories up to `max_depth` and reports contract
 * violations. Outcomes of a faulty (history, action) pair are not expanded.
 * Throws BudgetExceeded after visiting `node_budget` histories.
 */
template <CcmdpModel M>
std::vector<ModelViolation> validate_model(const M& model, int max_depth,
                                           std::size_t node_budget = 1'000'000) {
    if (max_depth > model.horizon()) throw InvalidConfig("max_depth exceeds the model horizon");
    std::vector<ModelViolation> out;
    std::size_t budget = node_budget;
    detail::validate_walk(model, root_history(model), max_depth, budget, node_budget, out);
    return out;
}

/// Number of safe histories of every depth 0..n, root included.
template <CcmdpModel M>
std::size_t count_reachable_histories(const M& model, std::size_t node_budget = 10'000'000) {
    std::size_t budget = node_budget;
    return detail::count_walk(model, root_history(model), budget, node_budget);
}

/// Worst-case forward-search size (|A| B)^n.
inline double forward_search_bound(double actions, double branching, int horizon) {
    return std::pow(actions * branching, horizon);
}

}  // namespace vulcan
