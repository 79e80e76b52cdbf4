#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vulcan/domains/collision.hpp"
#include "vulcan/domains/gauss_hermite.hpp"
#include "vulcan/errors.hpp"
#include "vulcan/history.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/risk_bound.hpp"

namespace vulcan::domains {

/// Linear prior mean and squared-exponential kernel amplitude * exp(-|d|^2 / length_sq).
struct GpHyperparameters {
    double intercept = 1.0;
    Vec2 slope{0.05, 0.05};
    double amplitude = 0.16;
    double length_sq = 8.0;
    double jitter = 1e-9;

    double mean(const Vec2& x) const { return intercept + slope[0] * x[0] + slope[1] * x[1]; }
    double kernel(const Vec2& a, const Vec2& b) const {
        const double dx = a[0] - b[0], dy = a[1] - b[1];
        return amplitude * std::exp(-(dx * dx + dy * dy) / length_sq);
    }
};

struct GpObservation {
    Vec2 location{};
    double value = 0.0;
    friend bool operator==(const GpObservation&, const GpObservation&) = default;
};

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Noiseless GP regression at `query`. Variance is floored at zero.
inline GpPrediction gp_posterior(const GpHyperparameters& hyper, const std::vector<GpObservation>& observations,
                                 const Vec2& query) {
    if (observations.empty()) return {hyper.mean(query), hyper.kernel(query, query)};
    const auto n = static_cast<Eigen::Index>(observations.size());
    Eigen::MatrixXd k(n, n);
    Eigen::VectorXd kq(n), resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& oi = observations[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = hyper.kernel(oi.location, observations[static_cast<std::size_t>(j)].location);
        }
        k(i, i) += hyper.jitter;
        kq(i) = hyper.kernel(query, oi.location);
        resid(i) = oi.value - hyper.mean(oi.location);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    const double scale = k.diagonal().maxCoeff();
    if (llt.info() != Eigen::Success || llt.matrixLLT().diagonal().array().square().minCoeff() <= 1e-12 * scale) {
        throw SingularKernel("kernel matrix is not positive definite");
    }
    const Eigen::VectorXd alpha = llt.solve(resid);
    const Eigen::VectorXd v = llt.matrixL().solve(kq);
    const double variance = hyper.kernel(query, query) - v.squaredNorm();
    return {hyper.mean(query) + kq.dot(alpha), std::max(variance, 0.0)};
}

struct GridCell {
    int x = 0;
    int y = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
    Vec2 location() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

struct GpExplorationConfig {
    int width = 6;
    int height = 6;
    GridCell start{};
    std::vector<Obstacle> obstacles;
    double sigma0 = 0.005;   ///< initial position variance per axis
    double sigma_w = 0.0001; ///< added position variance per step
    GpHyperparameters hyper;
    int horizon = 5;
    double discount = 1.0;
    RiskBound bound = RiskBound::saturating_affine(0.4, 0.015, 0.001);
    int quadrature_degree = 4;
    std::optional<double> initial_measurement;  ///< defaults to the prior mean at the start cell
    double failure_reward = 0.0;
};

/**
 * A wall between the two middle columns with a two-row gap, so routes across
 * the grid pass close to obstacle edges. Grids narrower than 3 or shorter than
 * 4 cells get no obstacles.
 */
inline std::vector<Obstacle> default_gp_obstacles(int width = 6, int height = 6) {
    if (width < 3 || height < 4) return {};
    const double x = static_cast<double>((width - 1) / 2);
    const double gap = static_cast<double>(height / 2);
    return {Obstacle{{x + 0.2, -0.5}, {x + 0.8, gap - 0.2}},
            Obstacle{{x + 0.2, gap + 1.2}, {x + 0.8, static_cast<double>(height) - 0.5}}};
}

/**
 * Vehicle exploring a scalar field drawn from a known GP.
 *
 * Each step moves the mean position to one of the 8 neighbouring cells; the
 * position covariance grows by sigma_w per step. Moving onto an unvisited
 * cell samples the field there (noiselessly) and pays the sampled value;
 * the sample is discretized with Gauss-Hermite quadrature on the current
 * posterior. Collision risk at the destination uses the covariance after the
 * move.
 */
class GpExplorationModel {
public:
    struct State {
        GridCell position;
        int t = 0;
        std::vector<GpObservation> observations;  ///< one per visited cell
        friend bool operator==(const State&, const State&) = default;
    };

    static constexpr std::array<std::array<int, 2>, 8> kMoves{{
        {{1, 0}}, {{1, 1}}, {{0, 1}}, {{-1, 1}}, {{-1, 0}}, {{-1, -1}}, {{0, -1}}, {{1, -1}},
    }};

    explicit GpExplorationModel(GpExplorationConfig config) : config_(std::move(config)) {
        const auto& c = config_;
        if (c.width < 1 || c.height < 1) throw InvalidConfig("grid must be at least 1x1");
        if (c.horizon < 0) throw InvalidConfig("horizon must be nonnegative");
        if (!on_grid(c.start)) throw InvalidConfig("start cell is off the grid");
        if (!(c.sigma0 > 0.0) || !(c.sigma_w >= 0.0)) throw InvalidConfig("position variances must be positive");
        if (!(c.hyper.amplitude > 0.0)) throw InvalidConfig("kernel amplitude must be positive");
        if (c.quadrature_degree < 1) throw InvalidConfig("quadrature degree must be positive");
        for (const auto& o : c.obstacles) {
            if (!(o.area() > 0.0)) throw InvalidConfig("obstacles need positive area");
            if (o.contains_strictly(c.start.location())) throw InvalidConfig("start cell lies inside an obstacle");
        }
    }

    State initial_state() const {
        const Vec2 loc = config_.start.location();
        const double value = config_.initial_measurement.value_or(config_.hyper.mean(loc));
        return State{config_.start, 0, {GpObservation{loc, value}}};
    }
    int horizon() const { return config_.horizon; }
    double discount() const { return config_.discount; }
    RiskBound risk_bound() const { return config_.bound; }
    const GpExplorationConfig& config() const { return config_; }

    Cov2 covariance(int t) const { return Cov2::diagonal(config_.sigma0 + t * config_.sigma_w); }

    std::vector<Action> actions(const History<State>& h) const {
        std::vector<Action> out;
        const GridCell& p = h.state().position;
        for (int i = 0; i < 8; ++i) {
            const GridCell next = destination(p, i);
            if (on_grid(next) && !blocked(next)) out.push_back(Action{i});
        }
        return out;
    }

    OutcomeSet<State> outcomes(const History<State>& h, Action a) const {
        const State& s = h.state();
        const GridCell next = destination(s.position, a.id);
        if (a.id < 0 || a.id >= 8 || !on_grid(next) || blocked(next)) {
            throw InvalidConfig("action " + std::to_string(a.id) + " is not available here");
        }
        const Vec2 loc = next.location();
        const double risk = collision_risk(loc, covariance(s.t + 1), config_.obstacles);
        OutcomeSet<State> out;
        out.failure_probability = risk;
        out.failure_reward = config_.failure_reward;
        const double survive = 1.0 - risk;
        if (!(survive > 0.0)) return out;

        State moved{next, s.t + 1, s.observations};
        if (visited(s, next)) {
            out.safe.push_back({std::move(moved), survive, 0.0});
            return out;
        }
        const auto prediction = gp_posterior(config_.hyper, s.observations, loc);
        for (const auto& q : gauss_hermite_outcomes(prediction.mean, prediction.variance, config_.quadrature_degree)) {
            State sampled = moved;
            sampled.observations.push_back({loc, q.value});
            out.safe.push_back({std::move(sampled), survive * q.probability, q.value});
        }
        return out;
    }

    std::string action_name(Action a) const {
        static const std::array<const char*, 8> names{"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
        return a.id >= 0 && a.id < 8 ? names[static_cast<std::size_t>(a.id)] : "?";
    }

    bool on_grid(const GridCell& c) const {
        return c.x >= 0 && c.y >= 0 && c.x < config_.width && c.y < config_.height;
    }
    bool blocked(const GridCell& c) const {
        for (const auto& o : config_.obstacles) {
            if (o.contains_strictly(c.location())) return true;
        }
        return false;
    }

private:
    static GridCell destination(const GridCell& from, int move) {
        if (move < 0 || move >= 8) return {-1, -1};
        const auto& d = kMoves[static_cast<std::size_t>(move)];
        return {from.x + d[0], from.y + d[1]};
    }
    static bool visited(const State& s, const GridCell& c) {
        const Vec2 loc = c.location();
        for (const auto& o : s.observations) {
            if (o.location == loc) return true;
        }
        return false;
    }

    GpExplorationConfig config_;
};

inline GpExplorationModel gp_exploration_model(GpExplorationConfig config) {
    return GpExplorationModel(std::move(config));
}

/// Start at the origin, default wall, horizon 5.
inline GpExplorationConfig default_gp_config(int width = 6, int height = 6) {
    GpExplorationConfig c;
    c.width = width;
    c.height = height;
    c.obstacles = default_gp_obstacles(width, height);
    return c;
}

}  // namespace vulcan::domains
