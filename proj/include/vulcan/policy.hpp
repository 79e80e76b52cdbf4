#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vulcan/outcome.hpp"

namespace vulcan {

/**
 * Node of a deterministic history-dependent policy.
 *
 * `children[i]` follows safe outcome i of `action`. A node without an action
 * is either at the horizon or an unexpanded frontier of an incomplete policy.
 */
struct PolicyNode {
    std::optional<Action> action;
    double value = 0.0;  ///< planner's value annotation (Q of the chosen action)
    long visits = 0;     ///< sample count, zero for exhaustive planners
    std::vector<PolicyNode> children;

    friend bool operator==(const PolicyNode&, const PolicyNode&) = default;
};

struct PolicyTree {
    PolicyNode root;
    int horizon = 0;

    /// True if every node shallower than the horizon has an action and one
    /// child per safe outcome was recorded.
    bool complete() const { return complete_from(root, 0); }

    std::size_t node_count() const { return count(root); }

    /// Decision equality: same action at every node, ignoring annotations.
    bool same_decisions(const PolicyTree& other) const {
        return horizon == other.horizon && same(root, other.root);
    }

private:
    bool complete_from(const PolicyNode& n, int depth) const {
        if (depth >= horizon) return true;
        if (!n.action) return false;
        for (const auto& c : n.children) {
            if (!complete_from(c, depth + 1)) return false;
        }
        return true;
    }

    static std::size_t count(const PolicyNode& n) {
        std::size_t k = 1;
        for (const auto& c : n.children) k += count(c);
        return k;
    }

    static bool same(const PolicyNode& a, const PolicyNode& b) {
        if (a.action != b.action || a.children.size() != b.children.size()) return false;
        for (std::size_t i = 0; i < a.children.size(); ++i) {
            if (!same(a.children[i], b.children[i])) return false;
        }
        return true;
    }
};

}  // namespace vulcan
