#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vulcan/errors.hpp"

namespace vulcan {

/**
 * Risk bounding function: maps expected lifetime reward to the largest
 * acceptable probability of failure.
 *
 * Built-in families:
 *   - Constant(delta):          x -> delta
 *   - Linear(alpha):            x -> alpha * x
 *   - SaturatingAffine(a,b,c):  x -> (1 - exp(-a x)) (b + c x)
 *
 * The family formula is evaluated first and the result is clamped to [0, 1].
 * Arguments may be negative.
 */
class RiskBound {
public:
    struct Constant {
        double delta;
    };
    struct Linear {
        double alpha;
    };
    struct SaturatingAffine {
        double a, b, c;
    };
    using Family = std::variant<Constant, Linear, SaturatingAffine>;

    RiskBound() : family_(Constant{0.0}) {}
    explicit RiskBound(Family family) : family_(family) {}

    static RiskBound constant(double delta) { return RiskBound(Constant{delta}); }
    static RiskBound linear(double alpha) { return RiskBound(Linear{alpha}); }
    static RiskBound saturating_affine(double a, double b, double c) {
        return RiskBound(SaturatingAffine{a, b, c});
    }

    /// Family formula before clamping.
    double raw(double x) const {
        return std::visit(
            [x](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.delta;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    return f.alpha * x;
                } else {
                    return -std::expm1(-f.a * x) * (f.b + f.c * x);
                }
            },
            family_);
    }

    double operator()(double x) const { return std::clamp(raw(x), 0.0, 1.0); }

    const Family& family() const { return family_; }

    /// Round-trips through parse(): "constant:0.01", "linear:0.002", "saturating:0.4,0.015,0.001".
    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&os](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    os << "constant:" << f.delta;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    os << "linear:" << f.alpha;
                } else {
                    os << "saturating:" << f.a << ',' << f.b << ',' << f.c;
                }
            },
            family_);
        return os.str();
    }

    static RiskBound parse(const std::string& text) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw InvalidConfig("risk bound '" + text + "' must look like family:params");
        }
        const std::string name = text.substr(0, colon);
        std::vector<double> params;
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                params.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw InvalidConfig("bad risk bound parameter '" + item + "'");
            }
        }
        auto expect = [&](std::size_t count) {
            if (params.size() != count) {
                throw InvalidConfig("risk bound '" + name + "' takes " + std::to_string(count) +
                                    " parameter(s)");
            }
        };
        if (name == "constant") {
            expect(1);
            return constant(params[0]);
        }
        if (name == "linear") {
            expect(1);
            return linear(params[0]);
        }
        if (name == "saturating") {
            expect(3);
            return saturating_affine(params[0], params[1], params[2]);
        }
        throw InvalidConfig("unknown risk bound family '" + name + "'");
    }

private:
    Family family_;
};

/// True if the clamped bound never decreases along the (sorted) grid.
inline bool is_nondecreasing_on(const RiskBound& bound, std::span<const double> grid) {
    std::vector<double> xs(grid.begin(), grid.end());
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (bound(xs[i - 1]) > bound(xs[i])) return false;
    }
    return true;
}

/// Midpoint concavity of the unclamped formula on every pair of grid points.
inline bool is_midpoint_concave_on(const RiskBound& bound, std::span<const double> grid,
                                   double slack = 1e-9) {
    for (double x1 : grid) {
        for (double x2 : grid) {
            const double mid = bound.raw(0.5 * (x1 + x2));
            if (mid < 0.5 * (bound.raw(x1) + bound.raw(x2)) - slack) return false;
        }
    }
    return true;
}

}  // namespace vulcan
