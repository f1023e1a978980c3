#pragma once

#include <cmath>
#include <vector>

#include "rng.hpp"
#include "sparse.hpp"

namespace melt {

struct SpectralEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false; // zero matrix
};

// Power-iteration estimate of the largest eigenvalue of a symmetric PSD
// matrix. Converged when successive Rayleigh quotients agree to a relative
// tol; otherwise the last iterate is returned with converged = false.
// The start vector comes from a fixed internal seed so results are
// reproducible without a seed parameter.
inline SpectralEstimate spectral_norm_estimate(const SparseSymMatrix& a,
                                               int max_iters = 100,
                                               double tol = 1e-10) {
    if (max_iters < 1) throw contract_error("spectral_norm_estimate: max_iters must be >= 1");
    SpectralEstimate est;
    Rng rng(0x5EEDC0DEULL);
    std::vector<double> x(a.dim), y;
    double norm = 0.0;
    for (double& v : x) {
        v = rng.next_normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : x) v /= norm;

    double rayleigh = 0.0, prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        est.iterations = it + 1;
        matvec_into(a, x, y);
        double ynorm = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < a.dim; ++i) {
            ynorm += y[i] * y[i];
            dot += x[i] * y[i];
        }
        ynorm = std::sqrt(ynorm);
        if (ynorm == 0.0) {
            est.degenerate = true;
            est.value = 0.0;
            return est;
        }
        rayleigh = dot;
        if (it > 0 && std::abs(rayleigh - prev) < tol * std::abs(rayleigh)) {
            est.converged = true;
            break;
        }
        prev = rayleigh;
        for (std::size_t i = 0; i < a.dim; ++i) x[i] = y[i] / ynorm;
    }
    est.value = rayleigh;
    return est;
}

} // namespace melt
