#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/model.hpp"
#include "vulcan/policy.hpp"
#include "vulcan/risk.hpp"
#include "vulcan/rng.hpp"

namespace vulcan {

struct PolicyEvaluation {
    double expected_reward = 0.0;  ///< E[g | s0, pi]
    double execution_risk = 0.0;   ///< er(s0, pi)
    double bound = 0.0;            ///< Delta(E[g])
    bool feasible = false;         ///< er <= Delta(E[g]) + 1e-12
};

namespace detail {

template <CcmdpModel M>
double expected_reward_walk(const M& model, const PolicyNode& node, const History<StateOf<M>>& h) {
    if (h.t() >= model.horizon()) return 0.0;
    if (!node.action) throw IncompletePolicy("no action at history '" + h.key() + "'");
    const auto outs = model.outcomes(h, *node.action);
    if (node.children.size() != outs.safe.size()) {
        throw IncompletePolicy("policy children do not match outcomes at '" + h.key() + "'");
    }
    double value = outs.failure_probability * outs.failure_reward;
    for (std::size_t i = 0; i < outs.safe.size(); ++i) {
        const auto& o = outs.safe[i];
        value += o.probability *
                 (o.reward + h.discount() * expected_reward_walk(model, node.children[i],
                                                                  h.then(*node.action, static_cast<int>(i), outs)));
    }
    return value;
}

}  // namespace detail

/// Exact E[g] and er of a complete policy, and whether it meets the risk bound.
template <CcmdpModel M>
PolicyEvaluation evaluate_policy(const M& model, const PolicyTree& policy) {
    const auto root = root_history(model);
    PolicyEvaluation e;
    e.expected_reward = detail::expected_reward_walk(model, policy.root, root);
    e.execution_risk = execution_risk_exact(model, policy.root, root);
    e.bound = RiskBound(model.risk_bound())(e.expected_reward);
    e.feasible = e.execution_risk <= e.bound + kConstraintSlack;
    return e;
}

// ---------------------------------------------------------------------------
// Brute-force enumeration

namespace detail {

template <CcmdpModel M>
double policy_count(const M& model, const History<StateOf<M>>& h, double cap) {
    if (h.t() >= model.horizon()) return 1.0;
    double total = 0.0;
    for (Action a : model.actions(h)) {
        const auto outs = model.outcomes(h, a);
        double product = 1.0;
        for (std::size_t i = 0; i < outs.safe.size() && product <= cap; ++i) {
            product *= policy_count(model, h.then(a, static_cast<int>(i), outs), cap);
        }
        total += product;
        if (total > cap) return total;
    }
    return total;
}

template <CcmdpModel M>
std::vector<PolicyNode> all_subpolicies(const M& model, const History<StateOf<M>>& h) {
    if (h.t() >= model.horizon()) return {PolicyNode{}};
    std::vector<PolicyNode> out;
    for (Action a : model.actions(h)) {
        const auto outs = model.outcomes(h, a);
        std::vector<PolicyNode> partial(1);
        partial[0].action = a;
        for (std::size_t i = 0; i < outs.safe.size(); ++i) {
            const auto options = all_subpolicies(model, h.then(a, static_cast<int>(i), outs));
            std::vector<PolicyNode> next;
            next.reserve(partial.size() * options.size());
            for (const auto& p : partial) {
                for (const auto& o : options) {
                    next.push_back(p);
                    next.back().children.push_back(o);
                }
            }
            partial = std::move(next);
        }
        for (auto& p : partial) out.push_back(std::move(p));
    }
    return out;
}

}  // namespace detail

/// Number of complete deterministic history-dependent policies (saturates past `cap`).
template <CcmdpModel M>
double count_policies(const M& model, double cap = 1e18) {
    return detail::policy_count(model, root_history(model), cap);
}

/**
 * Every complete deterministic history-dependent policy, depth first with
 * actions in model order. Throws BudgetExceeded when more than `budget`
 * policies exist.
 */
template <CcmdpModel M>
std::vector<PolicyTree> enumerate_policies(const M& model, std::size_t budget = 1'000'000) {
    const double count = count_policies(model, static_cast<double>(budget));
    if (count > static_cast<double>(budget)) {
        throw BudgetExceeded("too many policies to enumerate", budget);
    }
    std::vector<PolicyTree> out;
    for (auto& node : detail::all_subpolicies(model, root_history(model))) {
        out.push_back(PolicyTree{std::move(node), model.horizon()});
    }
    return out;
}

struct OptimalPolicy {
    PolicyTree policy;
    PolicyEvaluation evaluation;
};

/// Argmax E[g] subject to er <= Delta(E[g]) over all enumerated policies;
/// ties go to the first enumerated. Empty when no policy is feasible.
template <CcmdpModel M>
std::optional<OptimalPolicy> optimal_policy_by_enumeration(const M& model, std::size_t budget = 1'000'000) {
    std::optional<OptimalPolicy> best;
    for (auto& p : enumerate_policies(model, budget)) {
        const auto e = evaluate_policy(model, p);
        if (e.feasible && (!best || e.expected_reward > best->evaluation.expected_reward)) {
            best = OptimalPolicy{std::move(p), e};
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exact optimum through Pareto frontiers

/**
 * A non-dominated (E[g], er) pair achievable from some history, with the
 * sub-policy that achieves it.
 */
struct FrontierPoint {
    struct Witness {
        std::optional<Action> action;
        std::vector<std::shared_ptr<const Witness>> children;
    };

    double expected_reward = 0.0;
    double execution_risk = 0.0;
    std::shared_ptr<const Witness> witness;
};

namespace detail {

// Keeps points not dominated by another with >= reward and <= risk.
inline void prune_dominated(std::vector<FrontierPoint>& points) {
    std::sort(points.begin(), points.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
        if (a.expected_reward != b.expected_reward) return a.expected_reward > b.expected_reward;
        return a.execution_risk < b.execution_risk;
    });
    std::vector<FrontierPoint> kept;
    double best_risk = std::numeric_limits<double>::infinity();
    for (auto& p : points) {
        if (p.execution_risk < best_risk) {
            best_risk = p.execution_risk;
            kept.push_back(std::move(p));
        }
    }
    points = std::move(kept);
}

template <CcmdpModel M>
class FrontierBuilder {
public:
    FrontierBuilder(const M& model, std::size_t budget) : model_(model), budget_(budget) {}

    std::vector<FrontierPoint> build(const History<StateOf<M>>& h) {
        if (++visited_ > budget_) throw BudgetExceeded("frontier construction visited too many histories", budget_);
        if (h.t() >= model_.horizon()) {
            return {FrontierPoint{0.0, 0.0, leaf_}};
        }
        using Partial = std::pair<FrontierPoint, std::vector<std::shared_ptr<const FrontierPoint::Witness>>>;
        std::vector<FrontierPoint> all;
        for (Action a : model_.actions(h)) {
            const auto outs = model_.outcomes(h, a);
            std::vector<Partial> partial;
            partial.push_back({FrontierPoint{outs.failure_probability * outs.failure_reward,
                                             outs.failure_probability, nullptr},
                               {}});
            for (std::size_t i = 0; i < outs.safe.size(); ++i) {
                const auto& o = outs.safe[i];
                const auto sub = build(h.then(a, static_cast<int>(i), outs));
                std::vector<Partial> next;
                next.reserve(partial.size() * sub.size());
                for (const auto& [p, kids] : partial) {
                    for (const auto& s : sub) {
                        Partial q{FrontierPoint{p.expected_reward +
                                                    o.probability * (o.reward + h.discount() * s.expected_reward),
                                                p.execution_risk + o.probability * s.execution_risk, nullptr},
                                  kids};
                        q.second.push_back(s.witness);
                        next.push_back(std::move(q));
                    }
                }
                partial = prune(std::move(next));
            }
            for (auto& [p, kids] : partial) {
                auto w = std::make_shared<FrontierPoint::Witness>();
                w->action = a;
                w->children = std::move(kids);
                p.witness = std::move(w);
                all.push_back(std::move(p));
            }
        }
        prune_dominated(all);
        return all;
    }

private:
    template <class Partial>
    static std::vector<Partial> prune(std::vector<Partial> v) {
        std::stable_sort(v.begin(), v.end(), [](const Partial& a, const Partial& b) {
            if (a.first.expected_reward != b.first.expected_reward) {
                return a.first.expected_reward > b.first.expected_reward;
            }
            return a.first.execution_risk < b.first.execution_risk;
        });
        std::vector<Partial> kept;
        double best_risk = std::numeric_limits<double>::infinity();
        for (auto& p : v) {
            if (p.first.execution_risk < best_risk) {
                best_risk = p.first.execution_risk;
                kept.push_back(std::move(p));
            }
        }
        return kept;
    }

    const M& model_;
    std::size_t budget_;
    std::size_t visited_ = 0;
    std::shared_ptr<const FrontierPoint::Witness> leaf_ = std::make_shared<FrontierPoint::Witness>();
};

inline PolicyNode to_policy_node(const FrontierPoint::Witness& w) {
    PolicyNode n;
    n.action = w.action;
    for (const auto& c : w.children) n.children.push_back(to_policy_node(*c));
    return n;
}

}  // namespace detail

/**
 * Root Pareto frontier of (E[g], er) over all deterministic policies, sorted
 * by decreasing expected reward. Because the constraint er <= Delta(E[g]) is
 * monotone in both coordinates, the constrained optimum for any
 * nondecreasing Delta lies on this frontier.
 */
template <CcmdpModel M>
std::vector<FrontierPoint> pareto_frontier(const M& model, std::size_t node_budget = 10'000'000) {
    detail::FrontierBuilder<M> builder(model, node_budget);
    return builder.build(root_history(model));
}

inline PolicyTree frontier_policy(const FrontierPoint& point, int horizon) {
    return PolicyTree{detail::to_policy_node(*point.witness), horizon};
}

/// Best frontier point satisfying er <= Delta(E[g]).
inline const FrontierPoint* best_feasible(const std::vector<FrontierPoint>& frontier, const RiskBound& bound) {
    for (const auto& p : frontier) {
        if (p.execution_risk <= bound(p.expected_reward) + kConstraintSlack) return &p;
    }
    return nullptr;
}

/**
 * Exact solution of max E[g] s.t. er <= Delta(E[g]) over deterministic
 * history-dependent policies. Empty when no policy is feasible.
 */
template <CcmdpModel M>
std::optional<OptimalPolicy> optimal_policy(const M& model, std::size_t node_budget = 10'000'000) {
    const auto frontier = pareto_frontier(model, node_budget);
    const FrontierPoint* best = best_feasible(frontier, RiskBound(model.risk_bound()));
    if (!best) return std::nullopt;
    OptimalPolicy out{frontier_policy(*best, model.horizon()), {}};
    out.evaluation = evaluate_policy(model, out.policy);
    return out;
}

// ---------------------------------------------------------------------------
// Penalty method

namespace detail {

template <CcmdpModel M>
std::optional<PolicyNode> penalized_backup(const M& model, const History<StateOf<M>>& h, double penalty) {
    if (h.t() >= model.horizon()) return PolicyNode{};
    std::optional<PolicyNode> best;
    for (Action a : model.actions(h)) {
        const auto outs = model.outcomes(h, a);
        PolicyNode node;
        node.action = a;
        double q = outs.failure_probability * outs.failure_reward - penalty * outs.failure_probability;
        bool ok = true;
        for (std::size_t i = 0; i < outs.safe.size(); ++i) {
            auto c = penalized_backup(model, h.then(a, static_cast<int>(i), outs), penalty);
            if (!c) {
                ok = false;
                break;
            }
            q += outs.safe[i].probability * (outs.safe[i].reward + h.discount() * c->value);
            node.children.push_back(std::move(*c));
        }
        if (ok && (!best || q > best->value)) {
            node.value = q;
            best = std::move(node);
        }
    }
    return best;
}

}  // namespace detail

struct PenaltySolution {
    double penalty = 0.0;
    PolicyTree policy;
};

/**
 * For each M, the optimal policy of the unconstrained MDP whose rewards are
 * reduced by M times the immediate risk of each action. Ties go to the
 * lowest action index.
 */
template <CcmdpModel M>
std::vector<PenaltySolution> penalty_sweep(const M& model, const std::vector<double>& penalties) {
    std::vector<PenaltySolution> out;
    for (double m : penalties) {
        auto root = detail::penalized_backup(model, root_history(model), m);
        if (!root) throw Error("penalized MDP has a dead end before the horizon");
        out.push_back({m, PolicyTree{std::move(*root), model.horizon()}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random policies

namespace detail {

template <CcmdpModel M>
PolicyNode random_subpolicy(const M& model, const History<StateOf<M>>& h, Rng& rng) {
    if (h.t() >= model.horizon()) return {};
    const auto actions = model.actions(h);
    if (actions.empty()) throw NoActions("no actions at history '" + h.key() + "'");
    PolicyNode node;
    node.action = actions[static_cast<std::size_t>(rng.below(actions.size()))];
    const auto outs = model.outcomes(h, *node.action);
    for (std::size_t i = 0; i < outs.safe.size(); ++i) {
        node.children.push_back(random_subpolicy(model, h.then(*node.action, static_cast<int>(i), outs), rng));
    }
    return node;
}

}  // namespace detail

/// A complete policy choosing uniformly among the available actions at every history.
template <CcmdpModel M>
PolicyTree random_policy(const M& model, Rng& rng) {
    return PolicyTree{detail::random_subpolicy(model, root_history(model), rng), model.horizon()};
}

}  // namespace vulcan
