#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "rng.hpp"
#include "sparse.hpp"
#include "spectral.hpp"

namespace melt {

// Diagonally dominant PD test matrix: G has i.i.d. standard normal entries,
// W = GᵀG is scaled by a power-iteration estimate of its spectral norm, and
// the identity is added. Eigenvalues land in [1, 2] up to the estimate's
// convergence slack. The pattern is dense, stored as CSR like everything else.
inline SparseSymMatrix synth_wishart_identity(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw contract_error("synth_wishart_identity: need n >= 2");
    Rng rng = Rng::derive(seed, 0x77697368617274ULL);
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.next_normal();
    Eigen::MatrixXd w = g.transpose() * g;
    w = 0.5 * (w + w.transpose().eval()); // GEMM is not bit-symmetric

    std::vector<Triplet> upper;
    upper.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) upper.push_back({i, j, w(i, j)});
    SparseSymMatrix raw = build_symmetric(n, upper, true);

    const SpectralEstimate nu = spectral_norm_estimate(raw, 100, 1e-10);
    if (nu.degenerate || nu.value <= 0.0)
        throw numerical_failure_error("synth_wishart_identity: zero spectral norm", 0);

    for (auto& t : upper) {
        t.value /= nu.value;
        if (t.row == t.col) t.value += 1.0;
    }
    return build_symmetric(n, upper, true);
}

} // namespace melt
