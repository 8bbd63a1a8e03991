#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "pspace/csv.hpp"
#include "pspace/stats.hpp"

using namespace pspace;
using namespace pspace::testing;

TEST_CASE("csv split") {
  CHECK(csv::split("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split("\"x, y\",\"he said \"\"hi\"\"\", z ") ==
        std::vector<std::string>{"x, y", "he said \"hi\"", "z"});
  CHECK(csv::split("a,,") == std::vector<std::string>{"a", "", ""});
}

TEST_CASE("csv reader") {
  TempDir dir;
  write_text(dir / "f.csv", "\xEF\xBB\xBF" "A,B\r\n1,2\r\n\r\n3,4\n5\n");
  csv::Reader r(dir / "f.csv", {"a", "b"});
  CHECK(r.next()->at(1) == "2");
  CHECK(r.next()->at(0) == "3");
  CHECK(r.line() == 4);
  try {
    r.next();
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  CHECK_THROWS_AS(csv::Reader(dir / "missing.csv", {"a"}), IoError);
}

TEST_CASE("optional trailing columns") {
  TempDir dir;
  write_text(dir / "f.csv", "a,b\n1,2\n");
  csv::Reader r(dir / "f.csv", {"a"}, {"b"});
  CHECK(r.columns() == 2);
  write_text(dir / "g.csv", "a,c\n1,2\n");
  CHECK_THROWS_AS(csv::Reader(dir / "g.csv", {"a"}, {"b"}), ParseError);
}

TEST_CASE("number formatting") {
  CHECK(csv::format_real(0.5) == "0.5");
  CHECK(csv::format_real(2.0 / 3) == "0.666666666667");
  CHECK(csv::format_real(100) == "100");
  CHECK(csv::format_real(0.1 + 0.2) == "0.3");
  CHECK(csv::round_output(0.1 + 0.2) == 0.3);
  CHECK(csv::format_real(-0.0) == "0");
  double v = 0;
  CHECK(csv::parse_real("1e3", v));
  CHECK(v == 1000);
  CHECK_FALSE(csv::parse_real("inf", v));
  CHECK_FALSE(csv::parse_real("1.5x", v));
  CHECK_FALSE(csv::parse_real("", v));
  int i = 0;
  CHECK(csv::parse_int("1998", i));
  CHECK_FALSE(csv::parse_int("19.5", i));
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> x{4, 1, 3, 2};
  CHECK(stats::quantile(x, 0.0) == 1.0);
  CHECK(stats::quantile(x, 1.0) == 4.0);
  CHECK(stats::quantile(x, 0.5) == 2.5);
  CHECK(stats::quantile(x, 0.25) == 1.75);
  CHECK(stats::interquartile_range(x) == 1.5);
  const std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(stats::interquartile_range(y) == 4.0);
  CHECK_THROWS_AS(stats::interquartile_range(std::vector<double>{1, 2, 3}), UndefinedError);
}

TEST_CASE("pearson") {
  CHECK(stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(stats::pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(stats::pearson(std::vector<double>{1}, std::vector<double>{1}), UndefinedError);
  CHECK_THROWS_AS(stats::pearson(std::vector<double>{1, 1}, std::vector<double>{1, 2}), UndefinedError);
}

TEST_CASE("histogram and bin index") {
  auto h = stats::histogram(std::vector<double>{0.0, 0.05, 0.1, 0.99, 1.0, 1.5, -0.1}, 0.0, 1.0, 10);
  CHECK(h[0] == 2);
  CHECK(h[1] == 1);
  CHECK(h[9] == 2);
  std::size_t total = 0;
  for (auto v : h) total += v;
  CHECK(total == 5);
  CHECK(stats::bin_index(0.3, 0.1, 10) == 3);
  CHECK(stats::bin_index(0.7, 0.1, 10) == 7);
  CHECK(stats::bin_index(1.0, 0.1, 10) == 9);
  CHECK(stats::bin_index(0.0, 0.1, 10) == 0);
}

TEST_CASE("code lists") {
  CHECK(is_sorted_unique({"A", "B"}));
  CHECK_FALSE(is_sorted_unique({"B", "A"}));
  CHECK_FALSE(is_sorted_unique({"A", "A"}));
  CHECK(intersect_codes({"A", "B", "D"}, {"B", "C", "D"}) == CodeList{"B", "D"});
  CHECK(find_code({"A", "C"}, "C") == 1u);
  CHECK_FALSE(find_code({"A", "C"}, "B").has_value());
}
