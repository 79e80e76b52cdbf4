#pragma once

#include <string>

#include "vulcan/errors.hpp"
#include "vulcan/history.hpp"

namespace vulcan {

/// Lifetime reward g(h) = sum_t gamma^t R(s_t, a_t, s_{t+1}); failing
/// histories include the reward of the failure transition.
template <class State>
double lifetime_reward(const History<State>& h) {
    return h.discounted_reward();
}

/// f = g.
template <class State>
double f_g(const History<State>& h) {
    return h.discounted_reward();
}

/// f1(h) = sum_t gamma^t E[R(s_t, a_t, S_{t+1})], the expectation taken over
/// every branch of the action actually taken.
template <class State>
double f_one(const History<State>& h) {
    return h.discounted_mean_reward();
}

/// History functional used by the local constraint.
enum class Functional { G, F1 };

template <class State>
double evaluate(Functional f, const History<State>& h) {
    return f == Functional::G ? f_g(h) : f_one(h);
}

inline const char* to_string(Functional f) { return f == Functional::G ? "g" : "f1"; }

inline Functional parse_functional(const std::string& s) {
    if (s == "g") return Functional::G;
    if (s == "f1") return Functional::F1;
    throw InvalidConfig("unknown functional '" + s + "' (expected g or f1)");
}

}  // namespace vulcan
