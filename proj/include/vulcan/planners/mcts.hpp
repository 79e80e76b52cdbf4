#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulcan/errors.hpp"
#include "vulcan/functionals.hpp"
#include "vulcan/model.hpp"
#include "vulcan/policy.hpp"
#include "vulcan/risk.hpp"
#include "vulcan/rng.hpp"

namespace vulcan {

/// Stopping rule for sampling: a fixed number of top-level samples or wall-clock seconds.
struct SampleBudget {
    enum class Mode { Samples, Seconds };

    Mode mode = Mode::Samples;
    double limit = 0.0;

    static SampleBudget samples(std::uint64_t n) { return {Mode::Samples, static_cast<double>(n)}; }
    static SampleBudget seconds(double s) {
        if (!(s >= 0.0)) throw InvalidConfig("wall-clock budget must be nonnegative");
        return {Mode::Seconds, s};
    }

    /// "samples:N" or "seconds:S".
    static SampleBudget parse(const std::string& text) {
        const auto colon = text.find(':');
        const std::string mode = text.substr(0, colon);
        if (colon == std::string::npos) throw InvalidConfig("budget must be samples:N or seconds:S");
        const std::string value = text.substr(colon + 1);
        try {
            std::size_t used = 0;
            if (mode == "samples") {
                if (!value.empty() && value[0] == '-') throw std::invalid_argument(value);
                const auto n = std::stoull(value, &used);
                if (used == value.size()) return samples(n);
            } else if (mode == "seconds") {
                const double s = std::stod(value, &used);
                if (used == value.size()) return seconds(s);
            }
        } catch (const std::exception&) {
        }
        throw InvalidConfig("bad budget '" + text + "'");
    }

    std::string to_string() const {
        if (mode == Mode::Samples) return "samples:" + std::to_string(static_cast<std::uint64_t>(limit));
        return "seconds:" + std::to_string(limit);
    }
};

/// Picks an index into `remaining` (never empty) for a first visit.
template <class State>
using DefaultPolicy = std::function<std::size_t(const History<State>&, std::span<const Action>, Rng&)>;

template <class State>
DefaultPolicy<State> uniform_default_policy() {
    return [](const History<State>&, std::span<const Action> remaining, Rng& rng) {
        return static_cast<std::size_t>(rng.below(remaining.size()));
    };
}

struct VulcanOptions {
    Functional functional = Functional::F1;
    SampleBudget budget = SampleBudget::samples(10'000);
    double exploration = std::numbers::sqrt2;
    std::uint64_t seed = 0;
};

struct VulcanStats {
    std::uint64_t samples = 0;    ///< top-level samples taken
    std::uint64_t deletions = 0;  ///< actions deleted while sampling or cleaning up
    int max_depth = 0;
    std::size_t nodes = 0;        ///< search nodes allocated
    double seconds = 0.0;
};

struct VulcanResult {
    enum class Status {
        Solved,      ///< a policy was returned
        NoSolution,  ///< every action at the root was deleted
        Empty,       ///< nothing was sampled, so no action was chosen at the root
    };

    Status status = Status::Empty;
    PolicyTree policy;
    std::optional<double> root_value;  ///< Q~ of the root policy action
    bool complete = false;
    VulcanStats stats;

    bool has_solution() const { return status == Status::Solved; }
};

/**
 * Search-tree node for one state history.
 *
 * Arms are created lazily the first time the node is expanded, one per action
 * the model lists. Deleted arms keep their subtrees for diagnostics but never
 * contribute to counts, values or selection again.
 */
template <class State>
struct SearchNode {
    struct Arm {
        Action action;
        long visits = 0;  ///< N_{h,a}
        double q = 0.0;   ///< Q~(h,a); meaningless while !sampled
        bool sampled = false;
        bool deleted = false;
        long failure_visits = 0;
        std::optional<OutcomeSet<State>> outcomes;
        std::vector<std::unique_ptr<SearchNode>> children;  ///< per safe outcome, created on demand
    };

    explicit SearchNode(History<State> h) : history(std::move(h)) {}

    History<State> history;
    long visits = 0;        ///< N_h
    bool expanded = false;  ///< an action has been chosen here at least once
    bool arms_ready = false;
    std::optional<bool> horizon_feasible;
    std::vector<Arm> arms;
    std::optional<std::size_t> policy;  ///< index into arms

    /// Horizon nodes count as sampled once they passed the constraint check.
    bool sampled(int horizon) const { return history.t() >= horizon ? visits > 0 : expanded; }
};

/**
 * UCT action choice: argmax over non-deleted arms of
 * Q~(h,a) + c sqrt(log N_h / N_{h,a}); ties go to the lowest index.
 * Arms with no visits are treated as unbounded.
 */
template <class State>
std::size_t uct_select(const SearchNode<State>& node, double c) {
    std::optional<std::size_t> best;
    double best_score = 0.0;
    const double log_n = node.visits > 0 ? std::log(static_cast<double>(node.visits)) : 0.0;
    for (std::size_t i = 0; i < node.arms.size(); ++i) {
        const auto& arm = node.arms[i];
        if (arm.deleted) continue;
        const double score = arm.visits > 0
                                 ? arm.q + c * std::sqrt(log_n / static_cast<double>(arm.visits))
                                 : std::numeric_limits<double>::infinity();
        if (!best || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    if (!best) throw NoActions("all actions deleted at history '" + node.history.key() + "'");
    return *best;
}

/**
 * Anytime MCTS planner for chance-constrained MDPs.
 *
 * Sampling descends to the horizon with UCT, keeping the whole rollout in the
 * tree. A horizon history violating ser <= Delta(f) deletes the action that
 * led to it, and a history left without actions deletes its incoming action
 * in turn. When sampling stops, cleanup checks every immediate unsampled
 * outcome of the greedy policy and repairs the policy where checks fail.
 *
 * Counts follow N_h = sum_a N_{h,a} and N_{h,a} = sum_children N_child,
 * where a drawn failure branch counts as a child with value equal to its
 * transition reward. Backups use the value of each child's current policy
 * action, which equals its max Q~ during sampling.
 */
template <CcmdpModel M>
class VulcanPlanner {
public:
    using State = StateOf<M>;
    using Node = SearchNode<State>;

    VulcanPlanner(const M& model, VulcanOptions options,
                  DefaultPolicy<State> default_policy = uniform_default_policy<State>())
        : model_(model),
          options_(options),
          default_policy_(std::move(default_policy)),
          bound_(model.risk_bound()),
          horizon_(model.horizon()),
          rng_(options.seed) {
        if (!(options_.exploration >= 0.0)) throw InvalidConfig("exploration constant must be >= 0");
        root_ = make_node(root_history(model_));
    }

    /// Runs sampling under the configured budget, then cleanup.
    VulcanResult run() {
        const auto start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        };
        VulcanResult result;
        result.policy.horizon = horizon_;
        const bool counted = options_.budget.mode == SampleBudget::Mode::Samples;
        const auto sample_limit = static_cast<std::uint64_t>(options_.budget.limit);
        while (counted ? stats_.samples < sample_limit : elapsed() < options_.budget.limit) {
            if (!sample_once()) {
                result.status = VulcanResult::Status::NoSolution;
                finish(result, elapsed());
                return result;
            }
        }
        if (!cleanup(*root_)) {
            result.status = VulcanResult::Status::NoSolution;
            finish(result, elapsed());
            return result;
        }
        result.status = root_->policy ? VulcanResult::Status::Solved : VulcanResult::Status::Empty;
        if (root_->policy) result.root_value = root_->arms[*root_->policy].q;
        result.policy.root = extract(*root_);
        result.complete = root_->policy && is_complete(*root_);
        finish(result, elapsed());
        return result;
    }

    /// One top-level sample from the root; false means the root ran out of actions.
    bool sample_once() {
        ++stats_.samples;
        return sample(*root_);
    }

    /// Sample (one rollout) from `node`.
    bool sample(Node& node) {
        const int t = node.history.t();
        if (t > stats_.max_depth) stats_.max_depth = t;
        if (t >= horizon_) {
            if (!node.horizon_feasible) {
                node.horizon_feasible = local_constraint_holds(node.history, bound_, options_.functional);
            }
            if (!*node.horizon_feasible) return false;
            ++node.visits;
            return true;
        }
        ensure_arms(node);
        for (;;) {
            const std::size_t idx = choose(node);
            if (idx == kNone) return false;
            node.expanded = true;
            auto& arm = node.arms[idx];
            const auto& outs = outcomes_of(node, arm);
            arm.sampled = true;
            bool ok = true;
            const int drawn = draw(outs);
            if (drawn == kFailureOutcome) {
                ++arm.failure_visits;
            } else {
                ok = sample(child(node, arm, static_cast<std::size_t>(drawn)));
            }
            if (ok) {
                resum(node, arm);
                node.policy = best_arm(node);
                return true;
            }
            delete_arm(node, idx);
        }
    }

    /// Cleanup from the root.
    bool cleanup() { return cleanup(*root_); }

    /// Post-sampling repair of the greedy policy below `node`.
    bool cleanup(Node& node) {
        if (!node.sampled(horizon_)) {
            return local_constraint_holds(node.history, bound_, options_.functional);
        }
        if (node.history.t() >= horizon_) return true;
        for (;;) {
            if (!node.policy) return false;
            const std::size_t idx = *node.policy;
            auto& arm = node.arms[idx];
            const auto& outs = outcomes_of(node, arm);
            bool all_ok = true;
            for (std::size_t i = 0; i < outs.safe.size(); ++i) {
                all_ok = cleanup(child(node, arm, i)) && all_ok;
            }
            if (all_ok) {
                resum(node, arm);
                return true;
            }
            delete_arm(node, idx);
        }
    }

    const Node& root() const { return *root_; }
    const VulcanStats& stats() const { return stats_; }

    /// Nodes (reachable through live arms) whose counts break
    /// N_h = sum_a N_{h,a} or N_{h,a} = sum_children N_child.
    std::size_t count_inconsistencies() const { return inconsistencies(*root_); }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    std::unique_ptr<Node> make_node(History<State> h) {
        ++stats_.nodes;
        return std::make_unique<Node>(std::move(h));
    }

    void ensure_arms(Node& node) {
        if (node.arms_ready) return;
        node.arms_ready = true;
        for (Action a : model_.actions(node.history)) {
            typename Node::Arm arm;
            arm.action = a;
            node.arms.push_back(std::move(arm));
        }
    }

    const OutcomeSet<State>& outcomes_of(const Node& node, typename Node::Arm& arm) {
        if (!arm.outcomes) {
            arm.outcomes = model_.outcomes(node.history, arm.action);
            arm.children.resize(arm.outcomes->safe.size());
        }
        return *arm.outcomes;
    }

    Node& child(Node& node, typename Node::Arm& arm, std::size_t i) {
        auto& slot = arm.children[i];
        if (!slot) slot = make_node(node.history.then(arm.action, static_cast<int>(i), *arm.outcomes));
        return *slot;
    }

    // First visit and never-tried arms go through the default policy; UCT otherwise.
    std::size_t choose(Node& node) {
        std::vector<std::size_t> candidates;
        bool all_tried = true;
        for (std::size_t i = 0; i < node.arms.size(); ++i) {
            if (node.arms[i].deleted) continue;
            if (!node.arms[i].sampled) all_tried = false;
        }
        for (std::size_t i = 0; i < node.arms.size(); ++i) {
            const auto& arm = node.arms[i];
            if (!arm.deleted && (all_tried || !arm.sampled)) candidates.push_back(i);
        }
        if (candidates.empty()) return kNone;
        if (node.expanded && all_tried) return uct_select(node, options_.exploration);
        std::vector<Action> remaining;
        remaining.reserve(candidates.size());
        for (std::size_t i : candidates) remaining.push_back(node.arms[i].action);
        const std::size_t pick = default_policy_(node.history, remaining, rng_);
        if (pick >= candidates.size()) throw Error("default policy returned an out-of-range index");
        return candidates[pick];
    }

    int draw(const OutcomeSet<State>& outs) {
        const double u = rng_.uniform();
        double cumulative = 0.0;
        for (std::size_t i = 0; i < outs.safe.size(); ++i) {
            cumulative += outs.safe[i].probability;
            if (u < cumulative) return static_cast<int>(i);
        }
        if (outs.failure_probability > 0.0 || outs.safe.empty()) return kFailureOutcome;
        return static_cast<int>(outs.safe.size()) - 1;  // rounding in the cumulative sum
    }

    double node_value(const Node& node) const {
        if (node.history.t() >= horizon_ || !node.policy) return 0.0;
        return node.arms[*node.policy].q;
    }

    // Re-sums N_{h,a} and N_h and refreshes Q~(h,a) from the children.
    void resum(Node& node, typename Node::Arm& arm) {
        const auto& outs = *arm.outcomes;
        long total = arm.failure_visits;
        double weighted = static_cast<double>(arm.failure_visits) * outs.failure_reward;
        const double gamma = node.history.discount();
        for (std::size_t i = 0; i < arm.children.size(); ++i) {
            const auto& c = arm.children[i];
            if (!c || c->visits == 0) continue;
            total += c->visits;
            weighted += static_cast<double>(c->visits) * (outs.safe[i].reward + gamma * node_value(*c));
        }
        arm.visits = total;
        arm.q = total > 0 ? weighted / static_cast<double>(total) : 0.0;
        resum_node(node);
    }

    static void resum_node(Node& node) {
        long n = 0;
        for (const auto& a : node.arms) {
            if (!a.deleted) n += a.visits;
        }
        node.visits = n;
    }

    void delete_arm(Node& node, std::size_t idx) {
        node.arms[idx].deleted = true;
        ++stats_.deletions;
        resum_node(node);
        node.policy = best_arm(node);
    }

    // argmax Q~ over live, sampled arms; lowest index on ties.
    static std::optional<std::size_t> best_arm(const Node& node) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < node.arms.size(); ++i) {
            const auto& a = node.arms[i];
            if (a.deleted || !a.sampled || a.visits == 0) continue;
            if (!best || a.q > node.arms[*best].q) best = i;
        }
        return best;
    }

    PolicyNode extract(const Node& node) const {
        PolicyNode out;
        out.visits = node.visits;
        if (node.history.t() >= horizon_ || !node.sampled(horizon_) || !node.policy) return out;
        const auto& arm = node.arms[*node.policy];
        out.action = arm.action;
        out.value = arm.q;
        for (const auto& c : arm.children) {
            out.children.push_back(c ? extract(*c) : PolicyNode{});
        }
        return out;
    }

    bool is_complete(const Node& node) const {
        if (node.history.t() >= horizon_) return true;
        if (!node.sampled(horizon_) || !node.policy) return false;
        for (const auto& c : node.arms[*node.policy].children) {
            if (!c || !is_complete(*c)) return false;
        }
        return true;
    }

    std::size_t inconsistencies(const Node& node) const {
        if (node.history.t() >= horizon_ || !node.expanded) return 0;
        std::size_t bad = 0;
        long sum = 0;
        for (const auto& arm : node.arms) {
            if (arm.deleted) continue;
            sum += arm.visits;
            if (!arm.sampled) continue;
            long child_sum = arm.failure_visits;
            for (const auto& c : arm.children) {
                if (!c) continue;
                child_sum += c->visits;
                bad += inconsistencies(*c);
            }
            if (child_sum != arm.visits) ++bad;
        }
        if (sum != node.visits) ++bad;
        return bad;
    }

    void finish(VulcanResult& result, double seconds) {
        stats_.seconds = seconds;
        result.stats = stats_;
    }

    const M& model_;
    VulcanOptions options_;
    DefaultPolicy<State> default_policy_;
    RiskBound bound_;
    int horizon_;
    Rng rng_;
    VulcanStats stats_;
    std::unique_ptr<Node> root_;
};

/// Runs Vulcan on `model` and returns the cleaned-up greedy policy.
template <CcmdpModel M>
VulcanResult run_vulcan(const M& model, const VulcanOptions& options,
                    DefaultPolicy<StateOf<M>> default_policy = uniform_default_policy<StateOf<M>>()) {
    VulcanPlanner<M> planner(model, options, std::move(default_policy));
    return planner.run();
}

namespace detail {

template <CcmdpModel M>
void audit_walk(const M& model, const PolicyNode& node, const History<StateOf<M>>& h, Functional f,
                const RiskBound& bound, std::vector<std::string>& out) {
    if (h.t() >= model.horizon() || !node.action) {
        if (!local_constraint_holds(h, bound, f)) out.push_back(h.key());
        return;
    }
    const auto outs = model.outcomes(h, *node.action);
    for (std::size_t i = 0; i < outs.safe.size() && i < node.children.size(); ++i) {
        audit_walk(model, node.children[i], h.then(*node.action, static_cast<int>(i), outs), f, bound, out);
    }
}

}  // namespace detail

/**
 * Post-cleanup audit of a returned policy: every leaf of the policy tree,
 * whether at the horizon or an unexpanded frontier, must satisfy
 * ser <= Delta(f) on its (possibly partial) history. Returns the keys of
 * violating histories.
 */
template <CcmdpModel M>
std::vector<std::string> audit_policy(const M& model, const PolicyTree& policy, Functional f) {
    std::vector<std::string> out;
    detail::audit_walk(model, policy.root, root_history(model), f, RiskBound(model.risk_bound()), out);
    return out;
}

}  // namespace vulcan
