#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "maxent.hpp"
#include "probe.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"
#include "spectral.hpp"

namespace melt {

// Which upper spectral bound normalizes A into B = A/c. Gershgorin is the
// default: O(nnz), deterministic, and a guaranteed bound. The power-iteration
// estimate is tighter but only probabilistically an upper bound.
enum class NormKind { Gershgorin, SpectralEstimate };

struct LogDetOptions {
    NormKind normalization = NormKind::Gershgorin;
    double tol = 1e-6;            // fitter tolerance (entropic path)
    std::size_t max_cycles = 10000;
    std::size_t quad_nodes = 512;
    std::uint64_t init_seed = 0;  // fitter initialization; 0 = flat start
    double chebyshev_delta = 1e-4;
    unsigned num_threads = 0;     // 0 = MELT_THREADS or single-threaded
};

struct LogDetResult {
    double estimate = 0.0;     // natural log of det(A)
    std::string method;        // "maxent" | "taylor" | "chebyshev"
    double normalization = 1.0; // the constant c
    std::size_t k = 0;         // moments / polynomial degree used
    std::size_t m = 0;         // probes used
    std::size_t matvecs = 0;
    double fit_residual = 0.0; // entropic path only
    bool fit_converged = true;
    double seconds = 0.0;
};

inline double normalization_bound(const SparseSymMatrix& a, NormKind kind) {
    double c = 0.0;
    if (kind == NormKind::Gershgorin) {
        c = gershgorin_upper(a);
    } else {
        c = spectral_norm_estimate(a, 100, 1e-10).value;
    }
    if (!(c > 0.0))
        throw numerical_failure_error("normalization_bound: nonpositive spectral bound", 0);
    return c;
}

// Relative error against a nonzero reference. Identity-like matrices (log
// det exactly 0) have no meaningful relative error and must be compared
// absolutely by the caller.
inline double relative_error(double estimate, double exact) {
    if (exact == 0.0)
        throw undefined_value_error("relative_error: exact value is zero");
    return std::abs(estimate - exact) / std::abs(exact);
}

namespace detail {

class WallTimer {
  public:
    WallTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

// Entropic estimate from already-computed moments of B = A/c. Splitting this
// out lets tests inject exact moments and measure fit error with no Monte
// Carlo component, and lets callers reuse one probe sweep across methods.
inline LogDetResult logdet_maxent_from_moments(std::size_t n, double c,
                                               const MomentEstimate& moments,
                                               const LogDetOptions& opts = {}) {
    detail::WallTimer timer;
    if (n < 1) throw contract_error("logdet_maxent_from_moments: need n >= 1");
    if (!(c > 0.0)) throw contract_error("logdet_maxent_from_moments: need c > 0");
    if (moments.moments.size() < 2)
        throw contract_error("logdet_maxent_from_moments: need at least mu_0, mu_1");

    LogDetResult r;
    r.method = "maxent";
    r.normalization = c;
    r.k = moments.moments.size() - 1;
    r.m = moments.num_probes;
    r.matvecs = moments.matvecs;

    // mu_1 = 1 means the whole (clamped) spectrum of B sits at 1, i.e. A has
    // all eigenvalues at c: log det is exactly n log c and the fitter would
    // chase a point mass at the domain edge. Quadrature nodes are interior,
    // so this case must not go through the density at all.
    if (moments.moments[1] >= 1.0 - 1e-9) {
        r.estimate = static_cast<double>(n) * std::log(c);
        r.fit_residual = 0.0;
        r.fit_converged = true;
        r.seconds = timer.seconds();
        return r;
    }

    const QuadratureRule q = build_quadrature(opts.quad_nodes);
    FitOptions fo;
    fo.tol = opts.tol;
    fo.max_cycles = opts.max_cycles;
    fo.init_seed = opts.init_seed;
    const MaxEntDensity d = fit_maxent(moments, q, fo);
    r.estimate = static_cast<double>(n) * log_geometric_mean(d, q) +
                 static_cast<double>(n) * std::log(c);
    r.fit_residual = d.residual;
    r.fit_converged = d.converged;
    r.seconds = timer.seconds();
    return r;
}

inline LogDetResult logdet_maxent(const SparseSymMatrix& a, std::size_t k, std::size_t m,
                                  ProbeKind kind, std::uint64_t seed,
                                  const LogDetOptions& opts = {}) {
    detail::WallTimer timer;
    if (k < 2) throw contract_error("logdet_maxent: need k >= 2");
    if (m < 1) throw contract_error("logdet_maxent: need m >= 1");
    const double c = normalization_bound(a, opts.normalization);
    const MomentEstimate est =
        estimate_power_traces(a, k, m, kind, seed, 1.0 / c, opts.num_threads);
    LogDetResult r = logdet_maxent_from_moments(a.dim, c, est, opts);
    r.seconds = timer.seconds();
    return r;
}

// Truncated Mercator series: log det A = n log c - sum_{j<=k} Tr((I-B)^j)/j,
// with the traces estimated by the same probe sweep run on I - B.
inline LogDetResult logdet_taylor(const SparseSymMatrix& a, std::size_t k, std::size_t m,
                                  ProbeKind kind, std::uint64_t seed,
                                  const LogDetOptions& opts = {}) {
    detail::WallTimer timer;
    if (k < 1) throw contract_error("logdet_taylor: need k >= 1");
    if (m < 1) throw contract_error("logdet_taylor: need m >= 1");
    const std::size_t n = a.dim;
    const double c = normalization_bound(a, opts.normalization);
    const double inv_c = 1.0 / c;
    const MomentEstimate est = estimate_power_traces_op(
        [&a, inv_c, n](const std::vector<double>& w, std::vector<double>& next) {
            matvec_scaled_into(a, w, inv_c, next);
            for (std::size_t i = 0; i < n; ++i) next[i] = w[i] - next[i];
        },
        n, k, m, kind, seed, opts.num_threads);

    double series = 0.0;
    for (std::size_t j = 1; j <= k; ++j)
        series += est.trace_estimates[j] / static_cast<double>(j);

    LogDetResult r;
    r.method = "taylor";
    r.estimate = static_cast<double>(n) * std::log(c) - series;
    r.normalization = c;
    r.k = k;
    r.m = m;
    r.matvecs = est.matvecs;
    r.seconds = timer.seconds();
    return r;
}

namespace detail {

// Chebyshev coefficients of log(x) on [delta, 1] by collocation at the k+1
// Chebyshev points: c_i = (2/(k+1)) sum_j log(x_j) cos(i (j+1/2) pi / (k+1)),
// with the usual half weight on c_0 applied at evaluation time.
inline std::vector<double> chebyshev_log_coefficients(std::size_t k, double delta) {
    const std::size_t npts = k + 1;
    std::vector<double> fx(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        const double y = std::cos(M_PI * (static_cast<double>(j) + 0.5) /
                                  static_cast<double>(npts));
        const double x = 0.5 * (y + 1.0) * (1.0 - delta) + delta;
        fx[j] = std::log(x);
    }
    std::vector<double> coef(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < npts; ++j)
            acc += fx[j] * std::cos(M_PI * static_cast<double>(i) *
                                    (static_cast<double>(j) + 0.5) / static_cast<double>(npts));
        coef[i] = 2.0 * acc / static_cast<double>(npts);
    }
    return coef;
}

} // namespace detail

// Chebyshev series for log on [delta, 1], evaluated in B by the three-term
// recurrence on probe vectors. delta is the assumed lower spectral bound of
// B; eigenvalues below it are extrapolated by the polynomial.
inline LogDetResult logdet_chebyshev(const SparseSymMatrix& a, std::size_t k, std::size_t m,
                                     ProbeKind kind, std::uint64_t seed,
                                     const LogDetOptions& opts = {}) {
    detail::WallTimer timer;
    if (k < 1) throw contract_error("logdet_chebyshev: need k >= 1");
    if (m < 1) throw contract_error("logdet_chebyshev: need m >= 1");
    const double delta = opts.chebyshev_delta;
    if (!(delta > 0.0) || !(delta < 1.0))
        throw contract_error("logdet_chebyshev: delta must lie in (0, 1)");
    const std::size_t n = a.dim;
    const double c = normalization_bound(a, opts.normalization);
    const std::vector<double> coef = detail::chebyshev_log_coefficients(k, delta);

    // Affine map y(B) = (2B - (1+delta) I) / (1-delta) sends [delta, 1] to
    // [-1, 1]; each recurrence step costs exactly one matvec with A.
    const double y_scale = 2.0 / ((1.0 - delta) * c);
    const double y_shift = (1.0 + delta) / (1.0 - delta);
    auto apply_y = [&a, y_scale, y_shift, n](const std::vector<double>& w,
                                             std::vector<double>& next) {
        matvec_scaled_into(a, w, y_scale, next);
        for (std::size_t i = 0; i < n; ++i) next[i] -= y_shift * w[i];
    };

    std::vector<double> samples(m, 0.0);
    detail::for_each_probe(kind, n, m, seed, opts.num_threads,
                           [&](std::size_t p, const std::vector<double>& z) {
                               std::vector<double> t_prev = z, t_cur(n), next(n);
                               double zz = 0.0;
                               for (std::size_t i = 0; i < n; ++i) zz += z[i] * z[i];
                               double acc = 0.5 * coef[0] * zz;
                               apply_y(z, t_cur); // T_1(y) z
                               for (std::size_t j = 1; j <= k; ++j) {
                                   double dot = 0.0;
                                   for (std::size_t i = 0; i < n; ++i) dot += z[i] * t_cur[i];
                                   acc += coef[j] * dot;
                                   if (j == k) break;
                                   apply_y(t_cur, next);
                                   for (std::size_t i = 0; i < n; ++i)
                                       next[i] = 2.0 * next[i] - t_prev[i];
                                   t_prev.swap(t_cur);
                                   t_cur.swap(next);
                               }
                               samples[p] = acc;
                           });
    double mean = 0.0;
    for (std::size_t p = 0; p < m; ++p) mean += samples[p];
    mean /= static_cast<double>(m);

    LogDetResult r;
    r.method = "chebyshev";
    r.estimate = static_cast<double>(n) * std::log(c) + mean;
    r.normalization = c;
    r.k = k;
    r.m = m;
    r.matvecs = m * k;
    r.seconds = timer.seconds();
    return r;
}

} // namespace melt
