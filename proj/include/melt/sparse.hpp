#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace melt {

// Compressed sparse row storage of a symmetric matrix. Both triangles are
// stored explicitly so matvec and row scans never branch on triangle
// membership. Invariants established by build_symmetric:
//   - entry (i,j) present iff (j,i) present, with exactly equal values,
//   - every diagonal entry present (possibly zero),
//   - column indices sorted ascending within each row.
struct SparseSymMatrix {
    std::size_t dim = 0;
    std::vector<std::size_t> row_offsets; // dim + 1
    std::vector<std::size_t> col_indices; // nnz, sorted within each row
    std::vector<double> values;           // nnz

    std::size_t nnz() const { return values.size(); }

    // Value at (i, j), zero when the entry is not stored.
    double at(std::size_t i, std::size_t j) const {
        auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
        auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_indices.begin())];
    }
};

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

// Assemble a SparseSymMatrix from coordinate entries. With mirror_lower the
// input is read as one triangle and reflected; otherwise the caller supplies
// the full pattern. Duplicates are summed, missing diagonal entries are
// materialized as explicit zeros, and the result is verified to be exactly
// symmetric.
inline SparseSymMatrix build_symmetric(std::size_t dim, std::vector<Triplet> entries,
                                       bool mirror_lower) {
    if (dim == 0) throw contract_error("build_symmetric: dim must be positive");
    for (const Triplet& t : entries) {
        if (t.row >= dim || t.col >= dim)
            throw contract_error("triplet index out of range: (" + std::to_string(t.row) +
                                 ", " + std::to_string(t.col) + ") in dim " +
                                 std::to_string(dim));
    }
    if (mirror_lower) {
        std::size_t original = entries.size();
        for (std::size_t e = 0; e < original; ++e) {
            if (entries[e].row != entries[e].col)
                entries.push_back({entries[e].col, entries[e].row, entries[e].value});
        }
    }
    for (std::size_t i = 0; i < dim; ++i) entries.push_back({i, i, 0.0});

    // The value-bits tiebreak keeps duplicate coordinates in one canonical
    // order on both sides of the mirror, so their sums round identically and
    // the symmetry verification below can compare exactly.
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return std::bit_cast<std::uint64_t>(a.value) < std::bit_cast<std::uint64_t>(b.value);
    });

    SparseSymMatrix m;
    m.dim = dim;
    m.row_offsets.assign(dim + 1, 0);
    m.col_indices.reserve(entries.size());
    m.values.reserve(entries.size());
    for (std::size_t e = 0; e < entries.size();) {
        std::size_t r = entries[e].row, c = entries[e].col;
        double sum = 0.0;
        while (e < entries.size() && entries[e].row == r && entries[e].col == c)
            sum += entries[e++].value;
        m.col_indices.push_back(c);
        m.values.push_back(sum);
        ++m.row_offsets[r + 1];
    }
    for (std::size_t i = 0; i < dim; ++i) m.row_offsets[i + 1] += m.row_offsets[i];

    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t p = m.row_offsets[i]; p < m.row_offsets[i + 1]; ++p) {
            std::size_t j = m.col_indices[p];
            if (j == i) continue;
            if (m.at(j, i) != m.values[p])
                throw symmetry_error("matrix is not symmetric at (" + std::to_string(i) +
                                     ", " + std::to_string(j) + ")");
        }
    }
    return m;
}

inline SparseSymMatrix identity_matrix(std::size_t dim) {
    std::vector<Triplet> t;
    t.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) t.push_back({i, i, 1.0});
    return build_symmetric(dim, std::move(t), false);
}

inline SparseSymMatrix diagonal_matrix(const std::vector<double>& d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return build_symmetric(d.size(), std::move(t), false);
}

// y = A x. The _into form writes into caller storage so probe sweeps do not
// allocate per matvec.
inline void matvec_into(const SparseSymMatrix& a, const std::vector<double>& x,
                        std::vector<double>& y) {
    if (x.size() != a.dim)
        throw contract_error("matvec dimension mismatch: vector " +
                             std::to_string(x.size()) + " vs matrix " +
                             std::to_string(a.dim));
    y.resize(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
        double acc = 0.0;
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
            acc += a.values[p] * x[a.col_indices[p]];
        y[i] = acc;
    }
}

inline std::vector<double> matvec(const SparseSymMatrix& a, const std::vector<double>& x) {
    std::vector<double> y;
    matvec_into(a, x, y);
    return y;
}

// y = (A x) * scale, used by pipelines that work with B = A / c without
// materializing B.
inline void matvec_scaled_into(const SparseSymMatrix& a, const std::vector<double>& x,
                               double scale, std::vector<double>& y) {
    matvec_into(a, x, y);
    for (double& v : y) v *= scale;
}

// Max over rows of a_ii + sum_{j != i} |a_ij|; upper bound on the largest
// eigenvalue of a symmetric matrix.
inline double gershgorin_upper(const SparseSymMatrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) {
        double radius = 0.0, diag = 0.0;
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            if (a.col_indices[p] == i)
                diag = a.values[p];
            else
                radius += std::abs(a.values[p]);
        }
        double bound = diag + radius;
        if (i == 0 || bound > best) best = bound;
    }
    return best;
}

inline std::size_t bandwidth(const SparseSymMatrix& a) {
    std::size_t bw = 0;
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            std::size_t j = a.col_indices[p];
            std::size_t d = i > j ? i - j : j - i;
            bw = std::max(bw, d);
        }
    return bw;
}

inline double trace(const SparseSymMatrix& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) t += a.at(i, i);
    return t;
}

// Tr(A^2) = sum of squared entries for symmetric A; exact in O(nnz).
inline double trace_of_square(const SparseSymMatrix& a) {
    double t = 0.0;
    for (double v : a.values) t += v * v;
    return t;
}

inline double sum_diag_squares(const SparseSymMatrix& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i) {
        double d = a.at(i, i);
        t += d * d;
    }
    return t;
}

// A + shift * I without re-sorting: diagonal slots are always materialized
// by build_symmetric, so the shift edits values in place on a copy.
inline SparseSymMatrix with_diagonal_shift(const SparseSymMatrix& a, double shift) {
    SparseSymMatrix out = a;
    for (std::size_t i = 0; i < out.dim; ++i) {
        bool found = false;
        for (std::size_t p = out.row_offsets[i]; p < out.row_offsets[i + 1]; ++p)
            if (out.col_indices[p] == i) {
                out.values[p] += shift;
                found = true;
                break;
            }
        if (!found)
            throw contract_error("with_diagonal_shift: missing diagonal slot at row " +
                                 std::to_string(i));
    }
    return out;
}

} // namespace melt
