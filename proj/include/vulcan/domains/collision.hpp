#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "vulcan/errors.hpp"

namespace vulcan::domains {

using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 matrix stored as {xx, xy, yy}.
struct Cov2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;

    static Cov2 diagonal(double v) { return {v, 0.0, v}; }
    Cov2 operator+(const Cov2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    Cov2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
    bool positive_definite() const { return xx > 0.0 && xx * yy - xy * xy > 0.0; }
    /// Variance of the projection onto unit direction (ux, uy).
    double along(double ux, double uy) const { return ux * ux * xx + 2.0 * ux * uy * xy + uy * uy * yy; }
};

/// Axis-aligned rectangle [lo, hi] in grid units.
struct Obstacle {
    Vec2 lo{};
    Vec2 hi{};

    bool contains_strictly(const Vec2& p) const {
        return p[0] > lo[0] && p[0] < hi[0] && p[1] > lo[1] && p[1] < hi[1];
    }
    double area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }
};

/// Standard normal upper tail P[Z >= z].
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/**
 * Probability that N(mean, cov) crosses into `obstacle`, estimated as the
 * smallest crossing probability among the edges whose outside half-plane
 * contains the mean. Each edge's probability is the univariate Gaussian tail
 * beyond its supporting line along the edge normal.
 */
inline double obstacle_risk(const Vec2& mean, const Cov2& cov, const Obstacle& obstacle) {
    if (obstacle.contains_strictly(mean)) throw MeanInsideObstacle("mean lies inside an obstacle");
    struct Edge {
        double distance;  // from the mean to the line, measured outward
        double ux, uy;    // outward normal
    };
    const std::array<Edge, 4> edges{{
        {obstacle.lo[0] - mean[0], -1.0, 0.0},
        {mean[0] - obstacle.hi[0], 1.0, 0.0},
        {obstacle.lo[1] - mean[1], 0.0, -1.0},
        {mean[1] - obstacle.hi[1], 0.0, 1.0},
    }};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : edges) {
        if (e.distance < 0.0) continue;  // mean is on the inner side of this edge
        const double sigma = std::sqrt(cov.along(e.ux, e.uy));
        best = std::min(best, normal_upper_tail(e.distance / sigma));
    }
    return best;
}

/// Conservative total collision probability: the sum over obstacles, clamped to [0, 1].
inline double collision_risk(const Vec2& mean, const Cov2& cov, std::span<const Obstacle> obstacles) {
    if (!cov.positive_definite()) throw InvalidConfig("covariance must be positive definite");
    double total = 0.0;
    for (const auto& o : obstacles) total += obstacle_risk(mean, cov, o);
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace vulcan::domains
