#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cg.hpp"
#include "cholesky.hpp"
#include "errors.hpp"
#include "logdet.hpp"
#include "probe.hpp"
#include "rng.hpp"
#include "sparse.hpp"

namespace melt {

// Regular 2-D lattice GMRF with the standard SPDE 4-neighbor stencil.
struct LatticeSpec {
    std::size_t rows = 1;
    std::size_t cols = 1;
    double kappa = 0.1;
    double tau = 1.0;
    double nugget_variance = 0.0; // 0 = no nugget
};

// How a likelihood evaluation obtains its log determinants: the banded
// Cholesky oracle, or the entropic estimator with an explicit probe budget.
struct LogDetMethod {
    enum class Kind { Exact, Entropic };
    Kind kind = Kind::Exact;
    std::size_t k = 10;
    std::size_t m = 30;
    ProbeKind probes = ProbeKind::Rademacher;
    std::uint64_t seed = 0;
    LogDetOptions options{};

    static LogDetMethod exact() { return {}; }
    static LogDetMethod entropic(std::size_t k, std::size_t m,
                                 ProbeKind probes = ProbeKind::Rademacher,
                                 std::uint64_t seed = 0, LogDetOptions options = {}) {
        LogDetMethod mth;
        mth.kind = Kind::Entropic;
        mth.k = k;
        mth.m = m;
        mth.probes = probes;
        mth.seed = seed;
        mth.options = options;
        return mth;
    }
};

inline SparseSymMatrix build_precision(const LatticeSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1)
        throw contract_error("build_precision: lattice dimensions must be positive");
    if (!(spec.kappa > 0.0) || !(spec.tau > 0.0))
        throw contract_error("build_precision: kappa and tau must be positive");
    if (spec.nugget_variance < 0.0)
        throw contract_error("build_precision: nugget variance must be nonnegative");
    const std::size_t rows = spec.rows, cols = spec.cols;
    const std::size_t n = rows * cols;
    const double k2 = spec.kappa * spec.kappa;
    std::vector<Triplet> entries;
    entries.reserve(3 * n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            std::size_t degree = 0;
            if (r > 0) ++degree;
            if (r + 1 < rows) ++degree;
            if (c > 0) ++degree;
            if (c + 1 < cols) ++degree;
            entries.push_back({i, i, spec.tau * (k2 + static_cast<double>(degree))});
            if (c + 1 < cols) entries.push_back({i, i + 1, -spec.tau});
            if (r + 1 < rows) entries.push_back({i, i + cols, -spec.tau});
        }
    }
    return build_symmetric(n, entries, true);
}

inline double compute_logdet(const SparseSymMatrix& q, const LogDetMethod& method) {
    if (method.kind == LogDetMethod::Kind::Exact) return exact_logdet(q);
    return logdet_maxent(q, method.k, method.m, method.probes, method.seed, method.options)
        .estimate;
}

// Gaussian log likelihood of x under precision Q:
//   1/2 log det Q - 1/2 x'Qx - (n/2) log(2 pi).
inline double log_likelihood(const SparseSymMatrix& q, const std::vector<double>& x,
                             const LogDetMethod& method = LogDetMethod::exact()) {
    if (x.size() != q.dim) throw contract_error("log_likelihood: dimension mismatch");
    const double ld = compute_logdet(q, method);
    const std::vector<double> qx = matvec(q, x);
    double quad = 0.0;
    for (std::size_t i = 0; i < q.dim; ++i) quad += x[i] * qx[i];
    return 0.5 * ld - 0.5 * quad -
           0.5 * static_cast<double>(q.dim) * std::log(2.0 * M_PI);
}

// Likelihood with a nugget: the marginal covariance is Q^{-1} + s2 I. Its
// log determinant never forms Q^{-1}:
//   log det(Q^{-1} + s2 I) = n log s2 + log det(Q + I/s2) - log det Q,
// two sparse log determinants under the chosen method. The quadratic form
// uses (Q^{-1} + s2 I)^{-1} = Q (I + s2 Q)^{-1}: one CG solve against the
// well-conditioned I + s2 Q (pure matvecs), then one multiplication by Q.
inline double log_likelihood_nugget(const SparseSymMatrix& q, const std::vector<double>& x,
                                    double nugget_variance,
                                    const LogDetMethod& method = LogDetMethod::exact(),
                                    double cg_tol = 1e-12, int cg_max_iters = 10000) {
    if (x.size() != q.dim) throw contract_error("log_likelihood_nugget: dimension mismatch");
    if (!(nugget_variance > 0.0))
        throw contract_error("log_likelihood_nugget: nugget variance must be positive");
    const std::size_t n = q.dim;
    const double s2 = nugget_variance;

    const SparseSymMatrix shifted = with_diagonal_shift(q, 1.0 / s2);
    const double ld_marginal = static_cast<double>(n) * std::log(s2) +
                               compute_logdet(shifted, method) - compute_logdet(q, method);

    CgResult sol = cg_solve(
        [&q, s2](const std::vector<double>& v, std::vector<double>& out) {
            matvec_scaled_into(q, v, s2, out);
            for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
        },
        x, cg_tol, cg_max_iters);
    if (!sol.converged)
        throw iterative_solve_error("log_likelihood_nugget: CG on I + s2 Q did not converge",
                                    sol.residual);
    const std::vector<double> y = matvec(q, sol.x);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += x[i] * y[i];
    return -0.5 * ld_marginal - 0.5 * quad -
           0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

// Draws x ~ N(0, Q^{-1}) by x = L^{-T} z with Q = L L', z standard normal.
inline std::vector<double> sample_gmrf(const SparseSymMatrix& q, std::uint64_t seed) {
    const std::size_t bw = bandwidth(q);
    const std::size_t slots = q.dim * (bw + 1);
    if (slots > 400000000ULL)
        throw contract_error("sample_gmrf: band factorization would exceed the memory budget");
    BandCholesky chol(q, bw);
    Rng rng = Rng::derive(seed, 0x6A3FULL);
    std::vector<double> x(q.dim);
    for (auto& v : x) v = rng.next_normal();
    chol.solve_upper(x);
    return x;
}

} // namespace melt
