#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"
#include "gpemu/csv.hpp"
#include "gpemu/error.hpp"
#include "gpemu/format.hpp"

using namespace gpemu;

TEST_SUITE("csv") {
  TEST_CASE("parse and write") {
    const CsvTable t = parse_csv("x1,x2,y\n0.5,0.25,1e-3\n1,0,-2\n");
    CHECK(t.header == std::vector<std::string>{"x1", "x2", "y"});
    REQUIRE(t.values.rows() == 2);
    CHECK(t.values(0, 2) == 1e-3);
    CHECK(t.values(1, 2) == -2.0);
    CHECK(t.column_index("y") == 2);
    CHECK_THROWS_AS(t.column_index("z"), Error);
    CHECK(parse_csv(to_csv(t)).values == t.values);
  }

  TEST_CASE("line endings and blank lines") {
    const CsvTable t = parse_csv("a,b\r\n1,2\r\n\r\n3,4\r\n");
    CHECK(t.values.rows() == 2);
    CHECK(t.values(1, 1) == 4.0);
  }

  TEST_CASE("malformed input") {
    CHECK_THROWS_AS(parse_csv(""), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2.5.1\n"), Error);
  }

  TEST_CASE("round-trip formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(parse_double(format_double(v)) == v);
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::isinf(parse_double("inf")));
    CHECK_THROWS_AS(parse_double("1,5"), Error);
    CHECK_THROWS_AS(parse_double(""), Error);
  }

  TEST_CASE("numbered header") {
    CHECK(numbered_header("x", 3) == std::vector<std::string>{"x1", "x2", "x3"});
  }
}
