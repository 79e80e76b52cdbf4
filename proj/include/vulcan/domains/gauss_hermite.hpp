#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vulcan/errors.hpp"

namespace vulcan::domains {

struct QuadraturePoint {
    double value = 0.0;
    double probability = 0.0;
};

/**
 * Discretizes N(mean, variance) with Gauss-Hermite quadrature.
 *
 * Nodes and weights come from the Golub-Welsch eigen-decomposition of the
 * Hermite Jacobi matrix (off-diagonal sqrt(k/2)); the probability of node i is
 * w_i / sqrt(pi), i.e. the squared first component of its eigenvector.
 * Points are returned in increasing order. Zero variance collapses to a point
 * mass.
 */
inline std::vector<QuadraturePoint> gauss_hermite_outcomes(double mean, double variance, int degree = 4) {
    if (degree < 1) throw InvalidConfig("quadrature degree must be positive");
    if (!(variance >= 0.0)) throw InvalidConfig("variance must be nonnegative");
    if (variance == 0.0) return {{mean, 1.0}};
    const auto n = static_cast<Eigen::Index>(degree);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    const double scale = std::sqrt(2.0 * variance);
    std::vector<QuadraturePoint> out;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        out.push_back({mean + scale * solver.eigenvalues()(i), v0 * v0});
        total += v0 * v0;
    }
    for (auto& p : out) p.probability /= total;
    return out;
}

}  // namespace vulcan::domains
