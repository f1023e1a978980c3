#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include <melt/errors.hpp>
#include <melt/matrix_market.hpp>
#include <melt/sparse.hpp>

#include "test_util.hpp"

namespace {

// Writes content to a scratch file and deletes it when the test block ends.
struct ScratchFile {
    std::string path;
    explicit ScratchFile(const std::string& content, const char* tag) {
        path = (std::filesystem::temp_directory_path() /
                (std::string("melt_mm_") + tag + "_" + std::to_string(::getpid()) + ".mtx"))
                   .string();
        std::ofstream out(path);
        out << content;
    }
    ~ScratchFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("symmetric coordinate file expands the stored triangle") {
    const ScratchFile f("%%MatrixMarket matrix coordinate real symmetric\n"
                        "% a comment line\n"
                        "2 2 3\n"
                        "1 1 2.0\n"
                        "2 1 -1.0\n"
                        "2 2 2.0\n",
                        "sym");
    const melt::SparseSymMatrix a = melt::load_matrix_market(f.path);
    REQUIRE(a.dim == 2);
    REQUIRE(a.at(0, 0) == 2.0);
    REQUIRE(a.at(0, 1) == -1.0);
    REQUIRE(a.at(1, 0) == -1.0);
    REQUIRE(a.at(1, 1) == 2.0);
}

TEST_CASE("one-by-one file") {
    const ScratchFile f("%%MatrixMarket matrix coordinate real symmetric\n"
                        "1 1 1\n"
                        "1 1 1\n",
                        "one");
    const melt::SparseSymMatrix a = melt::load_matrix_market(f.path);
    REQUIRE(a.dim == 1);
    REQUIRE(a.at(0, 0) == 1.0);
}

TEST_CASE("integer field is promoted to real") {
    const ScratchFile f("%%MatrixMarket matrix coordinate integer symmetric\n"
                        "2 2 2\n"
                        "1 1 3\n"
                        "2 2 4\n",
                        "int");
    const melt::SparseSymMatrix a = melt::load_matrix_market(f.path);
    REQUIRE(a.at(0, 0) == 3.0);
    REQUIRE(a.at(1, 1) == 4.0);
}

TEST_CASE("general files are accepted only when actually symmetric") {
    const ScratchFile ok("%%MatrixMarket matrix coordinate real general\n"
                         "2 2 4\n"
                         "1 1 2\n"
                         "1 2 -1\n"
                         "2 1 -1\n"
                         "2 2 2\n",
                         "gen_ok");
    const melt::SparseSymMatrix a = melt::load_matrix_market(ok.path);
    REQUIRE(a.at(0, 1) == -1.0);

    const ScratchFile bad("%%MatrixMarket matrix coordinate real general\n"
                          "2 2 4\n"
                          "1 1 2\n"
                          "1 2 -1\n"
                          "2 1 -0.5\n"
                          "2 2 2\n",
                          "gen_bad");
    REQUIRE_THROWS_AS(melt::load_matrix_market(bad.path), melt::symmetry_error);
}

TEST_CASE("unsupported headers are rejected") {
    const ScratchFile arr("%%MatrixMarket matrix array real symmetric\n"
                          "2 2\n1\n2\n3\n",
                          "arr");
    REQUIRE_THROWS_AS(melt::load_matrix_market(arr.path), melt::unsupported_format_error);

    const ScratchFile cplx("%%MatrixMarket matrix coordinate complex symmetric\n"
                           "1 1 1\n1 1 1 0\n",
                           "cplx");
    REQUIRE_THROWS_AS(melt::load_matrix_market(cplx.path), melt::unsupported_format_error);

    const ScratchFile pat("%%MatrixMarket matrix coordinate pattern symmetric\n"
                          "1 1 1\n1 1\n",
                          "pat");
    REQUIRE_THROWS_AS(melt::load_matrix_market(pat.path), melt::unsupported_format_error);

    const ScratchFile skew("%%MatrixMarket matrix coordinate real skew-symmetric\n"
                           "1 1 1\n1 1 0\n",
                           "skew");
    REQUIRE_THROWS_AS(melt::load_matrix_market(skew.path), melt::unsupported_format_error);
}

TEST_CASE("parse errors carry line numbers") {
    const ScratchFile banner("not a matrix market file\n", "banner");
    try {
        melt::load_matrix_market(banner.path);
        FAIL("expected parse_error");
    } catch (const melt::parse_error& e) {
        REQUIRE(e.line() == 1);
    }

    const ScratchFile badidx("%%MatrixMarket matrix coordinate real symmetric\n"
                             "2 2 1\n"
                             "3 1 1.0\n",
                             "badidx");
    REQUIRE_THROWS_AS(melt::load_matrix_market(badidx.path), melt::parse_error);

    const ScratchFile zeroidx("%%MatrixMarket matrix coordinate real symmetric\n"
                              "2 2 1\n"
                              "0 1 1.0\n",
                              "zeroidx");
    REQUIRE_THROWS_AS(melt::load_matrix_market(zeroidx.path), melt::parse_error);

    const ScratchFile count("%%MatrixMarket matrix coordinate real symmetric\n"
                            "2 2 3\n"
                            "1 1 1.0\n",
                            "count");
    REQUIRE_THROWS_AS(melt::load_matrix_market(count.path), melt::parse_error);

    const ScratchFile notsquare("%%MatrixMarket matrix coordinate real symmetric\n"
                                "2 3 1\n"
                                "1 1 1.0\n",
                                "notsquare");
    REQUIRE_THROWS_AS(melt::load_matrix_market(notsquare.path), melt::parse_error);

    const ScratchFile badval("%%MatrixMarket matrix coordinate real symmetric\n"
                             "1 1 1\n"
                             "1 1 zebra\n",
                             "badval");
    REQUIRE_THROWS_AS(melt::load_matrix_market(badval.path), melt::parse_error);

    REQUIRE_THROWS_AS(melt::load_matrix_market("/nonexistent/melt_nope.mtx"),
                      melt::parse_error);
}

TEST_CASE("save and reload is value-identical") {
    const melt::SparseSymMatrix a = testutil::random_spd(23, 321);
    const ScratchFile f("", "roundtrip");
    melt::save_matrix_market(a, f.path);
    const melt::SparseSymMatrix b = melt::load_matrix_market(f.path);
    REQUIRE(b.dim == a.dim);
    REQUIRE(b.row_offsets == a.row_offsets);
    REQUIRE(b.col_indices == a.col_indices);
    REQUIRE(b.values == a.values);

    // And the re-serialization of the reload is byte-identical.
    const ScratchFile g("", "roundtrip2");
    melt::save_matrix_market(b, g.path);
    std::ifstream f1(f.path), f2(g.path);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    REQUIRE(s1 == s2);
    REQUIRE(s1.rfind("%%MatrixMarket matrix coordinate real symmetric\n", 0) == 0);
}
