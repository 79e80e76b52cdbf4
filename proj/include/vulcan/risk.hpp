#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/functionals.hpp"
#include "vulcan/history.hpp"
#include "vulcan/model.hpp"
#include "vulcan/policy.hpp"

namespace vulcan {

/// Absolute slack on ser <= Delta(f) comparisons.
inline constexpr double kConstraintSlack = 1e-12;

struct SerValue {
    double value = 0.0;
    bool is_failing_history = false;
};

/// ser of a safe sequence with immediate risks r_i: (1 - prod(1 - r_i)) / prod(1 - r_i).
inline double sequence_execution_risk(std::span<const double> risks) {
    double log_survival = 0.0;
    for (double r : risks) {
        if (r >= 1.0) throw DegenerateRisk("immediate risk of 1 on a safe history");
        log_survival += std::log1p(-r);
    }
    return std::expm1(-log_survival);
}

/// ser(h): zero for failing histories and for the empty history.
template <class State>
SerValue sequence_execution_risk(const History<State>& h) {
    if (h.failed()) return {0.0, true};
    if (h.degenerate()) throw DegenerateRisk("immediate risk of 1 on a safe history");
    return {std::expm1(-h.log_survival()), false};
}

/// Local constraint phi(f): ser(h) <= Delta(f(h)).
template <class State>
bool local_constraint_holds(const History<State>& h, const RiskBound& bound, Functional f) {
    if (h.failed()) return true;
    return sequence_execution_risk(h).value <= bound(evaluate(f, h)) + kConstraintSlack;
}

template <CcmdpModel M>
bool local_constraint_holds(const History<StateOf<M>>& h, const M& model, Functional f) {
    return local_constraint_holds(h, RiskBound(model.risk_bound()), f);
}

namespace detail {

template <CcmdpModel M>
double er_walk(const M& model, const PolicyNode& node, const History<StateOf<M>>& h) {
    if (h.t() >= model.horizon()) return 0.0;
    if (!node.action) throw IncompletePolicy("no action at history '" + h.key() + "'");
    const auto outs = model.outcomes(h, *node.action);
    if (node.children.size() != outs.safe.size()) {
        throw IncompletePolicy("policy children do not match outcomes at '" + h.key() + "'");
    }
    double er = outs.failure_probability;
    for (std::size_t i = 0; i < outs.safe.size(); ++i) {
        er += outs.safe[i].probability *
              er_walk(model, node.children[i], h.then(*node.action, static_cast<int>(i), outs));
    }
    return er;
}

struct CompletionBudget {
    std::size_t remaining;
    std::size_t limit;
    void take() {
        if (remaining == 0) throw BudgetExceeded("too many completions to enumerate", limit);
        --remaining;
    }
};

// Visits every completion of h under the policy (safe ones to the horizon,
// failing ones at the failure transition) with its conditional probability
// and the immediate risks of the suffix.
template <CcmdpModel M, class Visit>
void for_each_completion(const M& model, const PolicyNode& node, const History<StateOf<M>>& h,
                         double probability, std::vector<double>& suffix_risks, bool failed,
                         CompletionBudget& budget, Visit&& visit) {
    if (failed || h.t() >= model.horizon()) {
        budget.take();
        visit(probability, std::span<const double>(suffix_risks), failed);
        return;
    }
    if (!node.action) throw IncompletePolicy("no action at history '" + h.key() + "'");
    const auto outs = model.outcomes(h, *node.action);
    if (node.children.size() != outs.safe.size()) {
        throw IncompletePolicy("policy children do not match outcomes at '" + h.key() + "'");
    }
    suffix_risks.push_back(outs.failure_probability);
    if (outs.failure_probability > 0.0) {
        for_each_completion(model, node, h, probability * outs.failure_probability, suffix_risks, true,
                            budget, visit);
    }
    for (std::size_t i = 0; i < outs.safe.size(); ++i) {
        for_each_completion(model, node.children[i], h.then(*node.action, static_cast<int>(i), outs),
                            probability * outs.safe[i].probability, suffix_risks, false, budget, visit);
    }
    suffix_risks.pop_back();
}

}  // namespace detail

/**
 * Exact execution risk of `policy` (rooted at `h`) by the recursion
 * er(h_{0:n}) = 0, er(h) = r + sum_safe p * er(child).
 */
template <CcmdpModel M>
double execution_risk_exact(const M& model, const PolicyNode& policy, const History<StateOf<M>>& h) {
    return detail::er_walk(model, policy, h);
}

template <CcmdpModel M>
double execution_risk_exact(const M& model, const PolicyTree& policy) {
    return execution_risk_exact(model, policy.root, root_history(model));
}

/// Suffix ser as a function of the suffix's immediate risks.
using SuffixSer = std::function<double(std::span<const double>)>;

/**
 * E[ser(H_{t:n}) | h_{0:t}, pi] by exhaustive enumeration of completions.
 * `ser` may be replaced to check alternative definitions.
 */
template <CcmdpModel M>
double ser_expectation(const M& model, const PolicyNode& policy, const History<StateOf<M>>& h,
                       const SuffixSer& ser, std::size_t completion_budget = 1'000'000) {
    double total = 0.0;
    std::vector<double> risks;
    detail::CompletionBudget budget{completion_budget, completion_budget};
    detail::for_each_completion(model, policy, h, 1.0, risks, false, budget,
                                [&](double p, std::span<const double> suffix, bool failed) {
                                    if (!failed) total += p * ser(suffix);
                                });
    return total;
}

template <CcmdpModel M>
double ser_expectation(const M& model, const PolicyNode& policy, const History<StateOf<M>>& h,
                       std::size_t completion_budget = 1'000'000) {
    return ser_expectation(
        model, policy, h,
        [](std::span<const double> r) { return sequence_execution_risk(r); }, completion_budget);
}

/// sum over safe completions of p(h) / prod(1 - r_i); equals one for any policy.
template <CcmdpModel M>
double lemma1_sum(const M& model, const PolicyNode& policy, const History<StateOf<M>>& h,
                  std::size_t completion_budget = 1'000'000) {
    double total = 0.0;
    std::vector<double> risks;
    detail::CompletionBudget budget{completion_budget, completion_budget};
    detail::for_each_completion(model, policy, h, 1.0, risks, false, budget,
                                [&](double p, std::span<const double> suffix, bool failed) {
                                    if (failed) return;
                                    double survival = 1.0;
                                    for (double r : suffix) {
                                        if (r >= 1.0) throw DegenerateRisk("immediate risk of 1 on a safe history");
                                        survival *= 1.0 - r;
                                    }
                                    total += p / survival;
                                });
    return total;
}

}  // namespace vulcan
