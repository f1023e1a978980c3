#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"

namespace melt {

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0; // final |r| / |b|
    bool converged = false;
};

// Conjugate gradients on an SPD operator given as a callback
// apply(in, out). Stops when |r| <= tol * |b|.
inline CgResult cg_solve(const std::function<void(const std::vector<double>&,
                                                  std::vector<double>&)>& apply,
                         const std::vector<double>& b, double tol = 1e-10,
                         int max_iters = 10000) {
    std::size_t n = b.size();
    CgResult out;
    out.x.assign(n, 0.0);
    std::vector<double> r = b, p = b, ap(n);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    double rr = bnorm * bnorm;
    for (int it = 0; it < max_iters; ++it) {
        out.iterations = it + 1;
        apply(p, ap);
        double pap = 0.0;
        for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
        if (pap <= 0.0)
            throw iterative_solve_error("cg_solve: operator is not positive definite",
                                        std::sqrt(rr) / bnorm);
        double alpha = rr / pap;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rr_next = 0.0;
        for (double v : r) rr_next += v * v;
        out.residual = std::sqrt(rr_next) / bnorm;
        if (out.residual <= tol) {
            out.converged = true;
            return out;
        }
        double beta = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    return out;
}

} // namespace melt
