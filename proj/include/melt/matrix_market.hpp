#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace melt {

namespace detail {

inline std::string lowercase(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline double parse_real(const std::string& tok, std::size_t line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw parse_error("malformed numeric value '" + tok + "'", line);
    return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line) {
    std::size_t v = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || v == 0)
        throw parse_error("malformed 1-based index '" + tok + "'", line);
    return v;
}

} // namespace detail

// Read a Matrix Market coordinate file into full symmetric storage.
// Accepts `symmetric` files (one triangle stored) and `general` files whose
// pattern and values happen to be symmetric. Duplicate entries are summed and
// diagonal entries materialized.
inline SparseSymMatrix load_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'", 0);

    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) throw parse_error("empty file", 1);
    ++lineno;
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket")
        throw parse_error("missing %%MatrixMarket banner", lineno);
    object = detail::lowercase(object);
    format = detail::lowercase(format);
    field = detail::lowercase(field);
    symmetry = detail::lowercase(symmetry);
    if (object != "matrix")
        throw parse_error("unsupported object '" + object + "'", lineno);
    if (format != "coordinate")
        throw unsupported_format_error("unsupported format '" + format +
                                       "': only coordinate is readable");
    if (field != "real" && field != "integer")
        throw unsupported_format_error("unsupported field '" + field +
                                       "': only real and integer are readable");
    bool symmetric_file;
    if (symmetry == "symmetric")
        symmetric_file = true;
    else if (symmetry == "general")
        symmetric_file = false;
    else
        throw unsupported_format_error("unsupported symmetry '" + symmetry +
                                       "': only symmetric and general are readable");

    // Size line, after comments.
    std::size_t rows = 0, cols = 0, declared = 0;
    for (;;) {
        if (!std::getline(in, line)) throw parse_error("missing size line", lineno + 1);
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!(ss >> a >> b >> c)) throw parse_error("malformed size line", lineno);
        rows = detail::parse_index(a, lineno);
        cols = detail::parse_index(b, lineno);
        auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), declared);
        if (ec != std::errc{} || ptr != c.data() + c.size())
            throw parse_error("malformed entry count '" + c + "'", lineno);
        break;
    }
    if (rows != cols)
        throw parse_error("matrix is not square: " + std::to_string(rows) + "x" +
                          std::to_string(cols), lineno);

    std::vector<Triplet> entries;
    entries.reserve(declared);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!(ss >> a >> b)) throw parse_error("malformed entry line", lineno);
        if (!(ss >> c)) throw parse_error("entry line missing value", lineno);
        std::size_t i = detail::parse_index(a, lineno);
        std::size_t j = detail::parse_index(b, lineno);
        if (i > rows || j > cols)
            throw parse_error("entry index out of declared bounds", lineno);
        entries.push_back({i - 1, j - 1, detail::parse_real(c, lineno)});
    }
    if (entries.size() != declared)
        throw parse_error("entry count mismatch: header declares " +
                          std::to_string(declared) + ", file has " +
                          std::to_string(entries.size()), lineno);

    // build_symmetric throws symmetry_error if a general file is asymmetric.
    return build_symmetric(rows, std::move(entries), symmetric_file);
}

// Write lower-triangle coordinate form; load(save(A)) is value-identical.
inline void save_matrix_market(const SparseSymMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot open '" + path + "' for writing", 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p)
            if (a.col_indices[p] <= i) ++count;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.dim << " " << a.dim << " " << count << "\n";
    char buf[64];
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t p = a.row_offsets[i]; p < a.row_offsets[i + 1]; ++p) {
            if (a.col_indices[p] > i) continue;
            std::snprintf(buf, sizeof buf, "%.17g", a.values[p]);
            out << (i + 1) << " " << (a.col_indices[p] + 1) << " " << buf << "\n";
        }
}

} // namespace melt
