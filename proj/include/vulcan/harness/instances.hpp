#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "vulcan/domains/bandit.hpp"
#include "vulcan/domains/fig2.hpp"
#include "vulcan/domains/gp.hpp"
#include "vulcan/domains/random_ccmdp.hpp"
#include "vulcan/errors.hpp"
#include "vulcan/harness/config.hpp"
#include "vulcan/rng.hpp"

namespace vulcan::harness {

/// Size limits of the random instances used by the verification suites.
inline domains::RandomCcmdpParams verification_limits() {
    domains::RandomCcmdpParams p;
    p.horizon = 4;
    p.max_actions = 3;
    p.max_outcomes = 3;
    p.max_risk = 0.1;
    return p;
}

/// Instance `index` of a verification family: shape and Linear(alpha) bound
/// drawn from the stream seed + index.
inline domains::RandomCcmdp verification_instance(std::uint64_t seed, std::uint64_t index) {
    Rng rng = Rng::stream(seed, index);
    return domains::RandomCcmdp::draw(rng, verification_limits(), 0.001, 0.01);
}

/// Builds the configured domain and hands it to `fn` as a concrete model type.
template <class Fn>
decltype(auto) with_model(const RunConfig& c, Fn&& fn) {
    const RiskBound bound = RiskBound::parse(c.delta.empty() ? default_delta(c.domain) : c.delta);
    if (c.domain == "bandit") {
        return fn(domains::BanditModel(domains::machine_preset(c.preset), c.horizon, c.gamma, bound));
    }
    if (c.domain == "fig2") {
        return fn(domains::Fig2Model(bound));
    }
    if (c.domain == "gp") {
        auto g = domains::default_gp_config(c.grid_width, c.grid_height);
        g.horizon = c.horizon;
        g.discount = c.gamma;
        g.bound = bound;
        return fn(domains::GpExplorationModel(std::move(g)));
    }
    if (c.domain == "random") {
        domains::RandomCcmdpParams p;
        p.horizon = c.horizon;
        p.discount = c.gamma;
        return fn(domains::RandomCcmdp(c.seed, p, bound));
    }
    throw InvalidConfig("unknown domain '" + c.domain + "'");
}

}  // namespace vulcan::harness
