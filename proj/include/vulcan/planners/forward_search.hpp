#pragma once

#include <cstddef>
#include <optional>

#include "vulcan/errors.hpp"
#include "vulcan/functionals.hpp"
#include "vulcan/model.hpp"
#include "vulcan/policy.hpp"
#include "vulcan/risk.hpp"

namespace vulcan {

struct ForwardSearchOptions {
    Functional functional = Functional::F1;
    std::size_t node_budget = 50'000'000;
};

struct VulcanFsResult {
    PolicyTree policy;
    std::optional<double> root_value;  ///< empty means NoSolution
    std::size_t explored_history_count = 0;

    bool has_solution() const { return root_value.has_value(); }
};

namespace detail {

template <CcmdpModel M>
class ForwardSearch {
public:
    ForwardSearch(const M& model, const ForwardSearchOptions& options)
        : model_(model), options_(options), bound_(model.risk_bound()), horizon_(model.horizon()) {}

    // Value of the best phi(f)-respecting policy from h, or nullopt if none.
    std::optional<PolicyNode> search(const History<StateOf<M>>& h) {
        if (++explored_ > options_.node_budget) {
            throw BudgetExceeded("forward search exceeded its node budget", options_.node_budget);
        }
        if (h.t() >= horizon_) {
            if (!local_constraint_holds(h, bound_, options_.functional)) return std::nullopt;
            return PolicyNode{};
        }
        std::optional<PolicyNode> best;
        for (Action a : model_.actions(h)) {
            const auto outs = model_.outcomes(h, a);
            PolicyNode candidate;
            candidate.action = a;
            candidate.children.reserve(outs.safe.size());
            double q = outs.failure_probability * outs.failure_reward;
            bool feasible = true;
            for (std::size_t i = 0; i < outs.safe.size(); ++i) {
                auto child = search(h.then(a, static_cast<int>(i), outs));
                if (!child) {
                    feasible = false;
                    break;
                }
                q += outs.safe[i].probability * (outs.safe[i].reward + h.discount() * child->value);
                candidate.children.push_back(std::move(*child));
            }
            // strict comparison keeps the lowest-index action on ties
            if (feasible && (!best || q > best->value)) {
                candidate.value = q;
                best = std::move(candidate);
            }
        }
        return best;
    }

    std::size_t explored() const { return explored_; }

private:
    const M& model_;
    ForwardSearchOptions options_;
    RiskBound bound_;
    int horizon_;
    std::size_t explored_ = 0;
};

}  // namespace detail

/**
 * Exhaustive forward search for the best policy whose safe horizon
 * histories all satisfy ser(h) <= Delta(f(h)).
 *
 * Histories that violate the constraint at the horizon are infeasible and
 * poison every action leading to them. Ties go to the action listed first
 * by the model. A model without feasible policy yields a result with no
 * root value.
 */
template <CcmdpModel M>
VulcanFsResult vulcanfs(const M& model, const ForwardSearchOptions& options = {}) {
    detail::ForwardSearch<M> search(model, options);
    auto root = search.search(root_history(model));
    VulcanFsResult result;
    result.policy.horizon = model.horizon();
    result.explored_history_count = search.explored();
    if (root) {
        result.root_value = root->value;
        result.policy.root = std::move(*root);
    }
    return result;
}

template <CcmdpModel M>
VulcanFsResult vulcanfs(const M& model, Functional f) {
    return vulcanfs(model, ForwardSearchOptions{f});
}

}  // namespace vulcan
