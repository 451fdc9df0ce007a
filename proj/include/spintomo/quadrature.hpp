#pragma once

#include <cmath>
#include <vector>

#include "spin.hpp"

namespace spintomo {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n)) {
        require(n >= 1, "GaussLegendre: need at least one node");
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute the derivative at the converged node.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[static_cast<std::size_t>(i)] = -x;
            nodes[static_cast<std::size_t>(n - 1 - i)] = x;
            weights[static_cast<std::size_t>(i)] = w;
            weights[static_cast<std::size_t>(n - 1 - i)] = w;
        }
    }
};

/**
 * Product rule on the unit sphere: Gauss-Legendre in cos(theta) times the
 * trapezoid rule in phi. Exact for band-limited integrands whose degree in
 * cos(theta) is below 2*n_theta and whose azimuthal order is below n_phi.
 * Weights sum to 4 pi.
 */
struct SphereQuadrature {
    struct Node {
        Direction n;
        double weight;
    };
    std::vector<Node> nodes;
    int n_theta = 0;
    int n_phi = 0;

    SphereQuadrature(int n_theta_, int n_phi_) : n_theta(n_theta_), n_phi(n_phi_) {
        require(n_phi >= 1, "SphereQuadrature: need at least one azimuthal node");
        const GaussLegendre gl(n_theta);
        nodes.reserve(static_cast<std::size_t>(n_theta * n_phi));
        const double dphi = two_pi / n_phi;
        for (int i = 0; i < n_theta; ++i)
            for (int k = 0; k < n_phi; ++k)
                nodes.push_back({{gl.nodes[static_cast<std::size_t>(i)], k * dphi},
                                 gl.weights[static_cast<std::size_t>(i)] * dphi});
    }

    /// Default rule for spin-symbol products of a d-dimensional parent: (2d+1) x (4d+1).
    static SphereQuadrature for_dim(int d, int refine = 1) { return {(2 * d + 1) * refine, (4 * d + 1) * refine}; }

    template <class F>
    auto integrate(F&& f) const {
        using T = std::decay_t<decltype(f(nodes.front().n))>;
        T sum = nodes.front().weight * f(nodes.front().n);
        for (std::size_t i = 1; i < nodes.size(); ++i) sum += nodes[i].weight * f(nodes[i].n);
        return sum;
    }
};

}  // namespace spintomo
