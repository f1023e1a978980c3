#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace melt {

// Lower-triangular band Cholesky factor. Storage is row-major with bw+1
// slots per row: entry (i, j) with d = i - j in [0, bw] lives at
// a[i*(bw+1) + (bw - d)], so each row's slots run from the leftmost in-band
// column up to the diagonal. A dense matrix is the bw = n-1 special case,
// which is how the dense oracle path is implemented.
class BandCholesky {
public:
    // Factor A (given as sparse symmetric) inside bandwidth bw.
    BandCholesky(const SparseSymMatrix& a, std::size_t bw)
        : n_(a.dim), bw_(bw), a_(a.dim * (bw + 1), 0.0) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
                std::size_t j = a.col_indices[p];
                if (j > i) continue;
                if (i - j > bw_)
                    throw contract_error("entry outside declared bandwidth at row " +
                                         std::to_string(i));
                slot(i, j) = a.values[p];
            }
        factor();
    }

    std::size_t dim() const { return n_; }

    // log det A = 2 * sum log L_ii.
    double logdet() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += std::log(slot_c(i, i));
        return 2.0 * s;
    }

    // Solve L y = b in place.
    void solve_lower(std::vector<double>& b) const {
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t j0 = i > bw_ ? i - bw_ : 0;
            double acc = b[i];
            for (std::size_t j = j0; j < i; ++j) acc -= slot_c(i, j) * b[j];
            b[i] = acc / slot_c(i, i);
        }
    }

    // Solve L^T y = b in place.
    void solve_upper(std::vector<double>& b) const {
        for (std::size_t ii = n_; ii-- > 0;) {
            std::size_t jmax = std::min(n_ - 1, ii + bw_);
            double acc = b[ii];
            for (std::size_t j = ii + 1; j <= jmax; ++j) acc -= slot_c(j, ii) * b[j];
            b[ii] = acc / slot_c(ii, ii);
        }
    }

    // Solve A x = b (forward then backward substitution).
    std::vector<double> solve(std::vector<double> b) const {
        solve_lower(b);
        solve_upper(b);
        return b;
    }

private:
    double& slot(std::size_t i, std::size_t j) { return a_[i * (bw_ + 1) + (bw_ - (i - j))]; }
    double slot_c(std::size_t i, std::size_t j) const {
        return a_[i * (bw_ + 1) + (bw_ - (i - j))];
    }

    void factor() {
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t j0 = i > bw_ ? i - bw_ : 0;
            for (std::size_t j = j0; j <= i; ++j) {
                std::size_t k0 = std::max(j0, j > bw_ ? j - bw_ : 0);
                double acc = slot_c(i, j);
                const double* ri = &a_[i * (bw_ + 1) + (bw_ - (i - k0))];
                const double* rj = &a_[j * (bw_ + 1) + (bw_ - (j - k0))];
                for (std::size_t k = k0; k < j; ++k) acc -= ri[k - k0] * rj[k - k0];
                if (j == i) {
                    if (!(acc > 0.0))
                        throw not_positive_definite_error(
                            "Cholesky pivot is not positive", i);
                    slot(i, i) = std::sqrt(acc);
                } else {
                    slot(i, j) = acc / slot_c(j, j);
                }
            }
        }
    }

    std::size_t n_;
    std::size_t bw_;
    std::vector<double> a_;
};

// Exact log determinant oracle. Banded matrices factor inside their band at
// any size the band storage affords; everything else falls back to the dense
// (full-bandwidth) path, which is limited by dense_threshold.
inline double exact_logdet(const SparseSymMatrix& a, std::size_t dense_threshold = 4096) {
    if (a.dim == 0) return 0.0;
    std::size_t bw = bandwidth(a);
    constexpr std::size_t band_cap = 2048; // band storage stays modest below this
    if (bw <= band_cap || a.dim <= dense_threshold) {
        std::size_t use_bw = bw <= band_cap ? bw : a.dim - 1;
        return BandCholesky(a, use_bw).logdet();
    }
    throw contract_error("exact_logdet: dim " + std::to_string(a.dim) +
                         " with bandwidth " + std::to_string(bw) +
                         " exceeds the dense factorization threshold " +
                         std::to_string(dense_threshold));
}

} // namespace melt
