#pragma once

// Shared oracles for the test suite. Eigen's dense factorizations act as the
// independent reference implementation; nothing here is used by the library
// paths under test.

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <melt/rng.hpp>
#include <melt/sparse.hpp>

namespace testutil {

inline Eigen::MatrixXd densify(const melt::SparseSymMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim),
                                              static_cast<Eigen::Index>(a.dim));
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a.col_indices[p])) =
                a.values[p];
    return m;
}

inline Eigen::VectorXd dense_eigenvalues(const melt::SparseSymMatrix& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(densify(a),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double dense_logdet(const melt::SparseSymMatrix& a) {
    const Eigen::VectorXd ev = dense_eigenvalues(a);
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) s += std::log(ev(i));
    return s;
}

// Random dense-pattern SPD matrix with eigenvalues in roughly [shift, shift+2]:
// G G^T / n + shift I, entirely independent of the library's synthetic path.
inline melt::SparseSymMatrix random_spd(std::size_t n, std::uint64_t seed,
                                        double shift = 0.5) {
    melt::Rng rng = melt::Rng::derive(seed, 0x7E57ULL);
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.next_normal();
    Eigen::MatrixXd w = g * g.transpose() / static_cast<double>(n);
    std::vector<melt::Triplet> entries;
    entries.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = 0.5 * (w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                              w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
            if (i == j) v += shift;
            entries.push_back({i, j, v});
        }
    return melt::build_symmetric(n, entries, true);
}

} // namespace testutil
