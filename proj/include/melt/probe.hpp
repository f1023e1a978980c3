#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "sparse.hpp"

namespace melt {

enum class ProbeKind {
    Rademacher, // Hutchinson's ±1
    Gaussian,
    UnitSphere, // Gaussian draw rescaled to ||z|| = sqrt(n)
    FixedBasis, // sqrt(n) * e_i, i sampled (or cycled, see estimate_power_traces)
    Mubs,       // enumerated for completeness; construction not implemented
};

inline const char* probe_kind_name(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::Rademacher: return "rademacher";
        case ProbeKind::Gaussian: return "gaussian";
        case ProbeKind::UnitSphere: return "sphere";
        case ProbeKind::FixedBasis: return "basis";
        case ProbeKind::Mubs: return "mubs";
    }
    return "?";
}

// Estimated raw moments mu_0..mu_k of the spectral density of B = A/c,
// together with the trace-level estimates they came from. Index j of every
// array refers to power j; slot 0 is the trivial mu_0 = 1.
struct MomentEstimate {
    std::vector<double> moments;         // clamped into (0, 1]; mu_0 == 1
    std::vector<double> trace_estimates; // raw estimate of Tr(B^j); slot 0 = n
    std::vector<double> variances;       // sample variance of per-probe moment samples
    std::size_t num_probes = 0;
    ProbeKind kind = ProbeKind::Rademacher;
    std::uint64_t seed = 0;
    std::size_t matvecs = 0;
    std::size_t clamp_events = 0; // Monte Carlo excursions pulled back into (0, 1]
};

inline std::vector<double> draw_probe(ProbeKind kind, std::size_t n, Rng& rng) {
    if (n < 1) throw contract_error("draw_probe: need n >= 1");
    std::vector<double> z(n);
    switch (kind) {
        case ProbeKind::Rademacher:
            for (auto& v : z) v = rng.next_sign();
            return z;
        case ProbeKind::Gaussian:
            for (auto& v : z) v = rng.next_normal();
            return z;
        case ProbeKind::UnitSphere: {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (auto& v : z) {
                    v = rng.next_normal();
                    norm2 += v * v;
                }
            } while (norm2 == 0.0);
            const double s = std::sqrt(static_cast<double>(n) / norm2);
            for (auto& v : z) v *= s;
            return z;
        }
        case ProbeKind::FixedBasis: {
            const std::size_t i = rng.next_below(n);
            z[i] = std::sqrt(static_cast<double>(n));
            return z;
        }
        case ProbeKind::Mubs:
            throw unimplemented_error("draw_probe: MUBs probes are not implemented");
    }
    throw contract_error("draw_probe: unknown probe kind");
}

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MELT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

// FixedBasis probes inside an estimation sweep are stratified: probe p hits
// column (offset + p) mod n with a seed-derived offset, so m = n covers every
// column exactly once and the trace estimates become exact. Every other kind
// draws from its own derived stream, keyed by probe index so results do not
// depend on how probes are scheduled across threads.
inline std::size_t basis_offset_for(ProbeKind kind, std::uint64_t seed, std::size_t n) {
    return (kind == ProbeKind::FixedBasis) ? Rng::derive(seed, 0xBA515ULL).next_below(n) : 0;
}

inline std::vector<double> probe_for_index(ProbeKind kind, std::size_t n, std::uint64_t seed,
                                           std::size_t p, std::size_t basis_offset) {
    if (kind == ProbeKind::FixedBasis) {
        std::vector<double> z(n, 0.0);
        z[(basis_offset + p) % n] = std::sqrt(static_cast<double>(n));
        return z;
    }
    Rng rng = Rng::derive(seed, p);
    return draw_probe(kind, n, rng);
}

// Runs `body(p, z)` for every probe index, possibly across threads. Each call
// owns its probe vector; callers accumulate into per-probe slots and reduce
// in index order afterwards, keeping results thread-count independent.
template <typename Body>
void for_each_probe(ProbeKind kind, std::size_t n, std::size_t m, std::uint64_t seed,
                    unsigned num_threads, Body&& body) {
    if (kind == ProbeKind::Mubs)
        throw unimplemented_error("probe sweep: MUBs probes are not implemented");
    const std::size_t basis_offset = basis_offset_for(kind, seed, n);
    auto run_block = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            std::vector<double> z = probe_for_index(kind, n, seed, p, basis_offset);
            body(p, z);
        }
    };
    const unsigned want = resolve_threads(num_threads);
    const std::size_t nthreads = std::min<std::size_t>(want, m);
    if (nthreads <= 1) {
        run_block(0, m);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (m + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(m, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_block, begin, end);
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

// One Krylov sweep per probe against an arbitrary symmetric operator:
// w_0 = z, w_j = Op(w_{j-1}), recording z' Op^j z / n per probe and power.
// Exactly m * k_max operator applications are spent. Op must be safe to
// apply concurrently (pure function of its input).
template <typename Op>
MomentEstimate estimate_power_traces_op(Op&& op, std::size_t n, std::size_t k_max, std::size_t m,
                                        ProbeKind kind, std::uint64_t seed,
                                        unsigned num_threads = 0) {
    if (n < 1) throw contract_error("estimate_power_traces: need n >= 1");
    if (k_max < 1) throw contract_error("estimate_power_traces: need k_max >= 1");
    if (m < 1) throw contract_error("estimate_power_traces: need m >= 1");
    const double inv_n = 1.0 / static_cast<double>(n);

    // samples[p * k_max + (j-1)] = z_p' Op^j z_p / n, filled independently per
    // probe and reduced in probe order afterwards.
    std::vector<double> samples(m * k_max);
    detail::for_each_probe(kind, n, m, seed, num_threads,
                           [&](std::size_t p, const std::vector<double>& z) {
                               std::vector<double> w = z, next(n);
                               for (std::size_t j = 1; j <= k_max; ++j) {
                                   op(w, next);
                                   w.swap(next);
                                   double dot = 0.0;
                                   for (std::size_t i = 0; i < n; ++i) dot += z[i] * w[i];
                                   samples[p * k_max + (j - 1)] = dot * inv_n;
                               }
                           });

    MomentEstimate est;
    est.num_probes = m;
    est.kind = kind;
    est.seed = seed;
    est.matvecs = m * k_max;
    est.moments.assign(k_max + 1, 0.0);
    est.trace_estimates.assign(k_max + 1, 0.0);
    est.variances.assign(k_max + 1, 0.0);
    est.moments[0] = 1.0;
    est.trace_estimates[0] = static_cast<double>(n);

    for (std::size_t j = 1; j <= k_max; ++j) {
        double mean = 0.0;
        for (std::size_t p = 0; p < m; ++p) mean += samples[p * k_max + (j - 1)];
        mean /= static_cast<double>(m);
        double var = 0.0;
        if (m > 1) {
            for (std::size_t p = 0; p < m; ++p) {
                const double d = samples[p * k_max + (j - 1)] - mean;
                var += d * d;
            }
            var /= static_cast<double>(m - 1);
        }
        est.trace_estimates[j] = mean * static_cast<double>(n);
        est.variances[j] = var;
        double mu = mean;
        if (mu < 1e-12) {
            mu = 1e-12;
            ++est.clamp_events;
        } else if (mu > 1.0) {
            mu = 1.0;
            ++est.clamp_events;
        }
        est.moments[j] = mu;
    }
    return est;
}

// The standard sweep: probes B = scale * A without materializing it (pass
// scale = 1/c to work on the normalized matrix).
inline MomentEstimate estimate_power_traces(const SparseSymMatrix& a, std::size_t k_max,
                                            std::size_t m, ProbeKind kind, std::uint64_t seed,
                                            double scale = 1.0, unsigned num_threads = 0) {
    return estimate_power_traces_op(
        [&a, scale](const std::vector<double>& w, std::vector<double>& next) {
            matvec_scaled_into(a, w, scale, next);
        },
        a.dim, k_max, m, kind, seed, num_threads);
}

// Exhaustive basis sweep: Tr(B^j) = sum_i (B^j)_{ii} computed column by
// column in n * k_max matvecs. No randomness, no Monte Carlo error; used to
// separate fit error from estimation error.
inline MomentEstimate exact_power_moments(const SparseSymMatrix& a, std::size_t k_max,
                                          double scale = 1.0) {
    if (k_max < 1) throw contract_error("exact_power_moments: need k_max >= 1");
    const std::size_t n = a.dim;
    MomentEstimate est;
    est.num_probes = n;
    est.kind = ProbeKind::FixedBasis;
    est.seed = 0;
    est.matvecs = n * k_max;
    est.moments.assign(k_max + 1, 0.0);
    est.trace_estimates.assign(k_max + 1, 0.0);
    est.variances.assign(k_max + 1, 0.0);
    est.moments[0] = 1.0;
    est.trace_estimates[0] = static_cast<double>(n);

    std::vector<double> traces(k_max + 1, 0.0);
    std::vector<double> w(n), next(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::fill(w.begin(), w.end(), 0.0);
        w[col] = 1.0;
        for (std::size_t j = 1; j <= k_max; ++j) {
            matvec_scaled_into(a, w, scale, next);
            w.swap(next);
            traces[j] += w[col];
        }
    }
    for (std::size_t j = 1; j <= k_max; ++j) {
        est.trace_estimates[j] = traces[j];
        double mu = traces[j] / static_cast<double>(n);
        if (mu < 1e-12) {
            mu = 1e-12;
            ++est.clamp_events;
        } else if (mu > 1.0) {
            mu = 1.0;
            ++est.clamp_events;
        }
        est.moments[j] = mu;
    }
    return est;
}

// Analytic single-shot variance of z'Az per probe family. The quadratic
// traces are exact O(nnz) scans, so keep the matrix at diagnostic scale.
inline double single_shot_variance(ProbeKind kind, const SparseSymMatrix& a) {
    const double d = static_cast<double>(a.dim);
    const double tr = trace(a);
    const double tr2 = trace_of_square(a);
    const double diag2 = sum_diag_squares(a);
    switch (kind) {
        case ProbeKind::Gaussian:
            return 2.0 * tr2;
        case ProbeKind::Rademacher:
            return 2.0 * (tr2 - diag2);
        case ProbeKind::FixedBasis:
            return d * diag2 - tr * tr;
        case ProbeKind::Mubs:
            return (d / (d + 1.0)) * tr2 - (1.0 / (d + 1.0)) * tr * tr;
        case ProbeKind::UnitSphere:
            throw undefined_value_error(
                "single_shot_variance: no closed form tabulated for unit-sphere probes");
    }
    throw contract_error("single_shot_variance: unknown probe kind");
}

} // namespace melt
