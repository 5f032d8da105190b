#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "rankot/csv.hpp"
#include "rankot/errors.hpp"

using namespace rankot;

namespace {

// Temporary file that cleans up after itself.
struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/rankot_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void fill(const std::string& content) const {
        std::ofstream out(path);
        out << content;
    }
};

} // namespace

TEST_CASE("write then read round-trips doubles exactly") {
    TempFile f("roundtrip.csv");
    Eigen::MatrixXd M(3, 2);
    M << 1.0 / 3.0, -2.5,
         1e-300, 12345.6789,
         0.1 + 0.2, -0.0;
    write_csv(f.path, M);
    const Eigen::MatrixXd back = read_csv(f.path);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 2);
    CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("headers are written and skipped on read") {
    TempFile f("header.csv");
    Eigen::MatrixXd M(2, 3);
    M << 1, 2, 3,
         4, 5, 6;
    write_csv(f.path, M, {"a", "b", "c"});

    std::ifstream in(f.path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "a,b,c");

    const Eigen::MatrixXd back = read_csv(f.path);
    CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reader tolerates whitespace, blank lines, and CRLF endings") {
    TempFile f("messy.csv");
    f.fill("x,y\r\n 1.5 ,\t2\r\n\r\n-3,4e2\r\n");
    const Eigen::MatrixXd M = read_csv(f.path);
    REQUIRE(M.rows() == 2);
    REQUIRE(M.cols() == 2);
    CHECK(M(0, 0) == 1.5);
    CHECK(M(0, 1) == 2.0);
    CHECK(M(1, 0) == -3.0);
    CHECK(M(1, 1) == 400.0);
}

TEST_CASE("headerless numeric files keep their first row") {
    TempFile f("noheader.csv");
    f.fill("7,8\n9,10\n");
    const Eigen::MatrixXd M = read_csv(f.path);
    REQUIRE(M.rows() == 2);
    CHECK(M(0, 0) == 7.0);
}

TEST_CASE("reader rejects malformed input with the offending location") {
    TempFile ragged("ragged.csv");
    ragged.fill("1,2\n3,4,5\n");
    CHECK_THROWS_WITH_AS(read_csv(ragged.path), doctest::Contains(":2"),
                         invalid_argument_error);

    TempFile text("text.csv");
    text.fill("1,2\n3,oops\n");
    CHECK_THROWS_WITH_AS(read_csv(text.path), doctest::Contains("non-numeric"),
                         invalid_argument_error);

    TempFile trailing("trailing.csv");
    trailing.fill("1,2\n3,4,\n");
    CHECK_THROWS_AS(read_csv(trailing.path), invalid_argument_error);

    TempFile empty("empty.csv");
    empty.fill("");
    CHECK_THROWS_AS(read_csv(empty.path), invalid_argument_error);

    CHECK_THROWS_WITH_AS(read_csv("/tmp/rankot_missing_file.csv"),
                         doctest::Contains("rankot_missing_file"), invalid_argument_error);
}

TEST_CASE("writer validates the header width") {
    TempFile f("badheader.csv");
    Eigen::MatrixXd M(1, 2);
    M << 1, 2;
    CHECK_THROWS_AS(write_csv(f.path, M, {"only_one"}), invalid_argument_error);
}
