#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace melt {

// Gauss-Legendre rule mapped to [0, 1]. All nodes are interior, so
// integrands with endpoint singularities (log) stay finite; weights sum to 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule build_quadrature(std::size_t num_nodes = 512) {
    if (num_nodes < 8) throw contract_error("build_quadrature: need at least 8 nodes");
    QuadratureRule q;
    q.nodes.resize(num_nodes);
    q.weights.resize(num_nodes);
    const std::size_t n = num_nodes;
    // Newton iteration on P_n from the standard cosine initial guess; nodes
    // come in symmetric pairs so only half are solved.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                             (static_cast<double>(k) - 1.0) * p0) /
                            static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            pp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        // Map [-1,1] -> [0,1]; x is the node near the upper end for small i.
        q.nodes[n - 1 - i] = (1.0 + x) / 2.0;
        q.nodes[i] = (1.0 - x) / 2.0;
        q.weights[n - 1 - i] = w / 2.0;
        q.weights[i] = w / 2.0;
    }
    return q;
}

inline double integrate(const QuadratureRule& q, const std::vector<double>& f_at_nodes) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * f_at_nodes[i];
    return s;
}

} // namespace melt
