#include "psvar/errors.hpp"
#include "psvar/panel.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace psvar;

namespace {

PanelDataset parse(const std::string& text, const std::vector<VariableSpec>& schema = {}) {
  std::istringstream in(text);
  return read_panel_csv(in, schema);
}

}  // namespace

TEST_CASE("complete two-country file loads") {
  const auto panel = parse(
      "country,year,p,z\n"
      "B,1990,1,10\nB,1991,2,11\nB,1992,3,12\n"
      "A,1990,4,13\nA,1991,5,14\nA,1992,6,15\n");
  REQUIRE(panel.countries.size() == 2);
  CHECK(panel.countries[0].country_id == "A");
  CHECK(panel.countries[1].country_id == "B");
  CHECK(panel.countries[0].length() == 3);
  CHECK(panel.countries[0].values(2, 1) == 15.0);
  CHECK(panel.variable_names == std::vector<std::string>{"p", "z"});
}

TEST_CASE("rows out of order are sorted by year") {
  const auto panel = parse("country,year,p\nA,1992,3\nA,1990,1\nA,1991,2\nB,1990,0\nB,1991,0\n");
  const auto& a = panel.country("A");
  CHECK(a.first_year == 1990);
  CHECK(a.values(0, 0) == 1.0);
  CHECK(a.values(2, 0) == 3.0);
}

TEST_CASE("interior gap is rejected with country, variable and year") {
  const std::string text =
      "country,year,p,z\n"
      "A,1994,1,1\nA,1995,,1\nA,1996,1,1\n"
      "B,1994,1,1\nB,1995,1,1\nB,1996,1,1\n";
  try {
    (void)parse(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("A") != std::string::npos);
    CHECK(msg.find("p") != std::string::npos);
    CHECK(msg.find("1995") != std::string::npos);
  }
}

TEST_CASE("missing year row inside a country is an interior gap") {
  CHECK_THROWS_AS(parse("country,year,p\nA,1994,1\nA,1996,1\nB,1994,1\nB,1995,1\n"),
                  ValidationError);
}

TEST_CASE("leading and trailing missing values are kept") {
  const auto panel = parse(
      "country,year,p,z\n"
      "A,1990,1,\nA,1991,2,5\nA,1992,3,\n"
      "B,1990,1,1\nB,1991,1,1\nB,1992,1,1\n");
  const auto& a = panel.country("A");
  CHECK(std::isnan(a.values(0, 1)));
  CHECK(a.observed_span(1).begin == 1);
  CHECK(a.observed_span(1).end == 2);
  CHECK(a.complete_span({0, 1}).size() == 1);
}

TEST_CASE("bound violation is rejected") {
  std::vector<VariableSpec> schema{{"alpha", Units::fraction, std::pair{0.0, 1.0}}};
  CHECK_THROWS_AS(parse("country,year,alpha\nA,1990,0.3\nA,1991,1.7\nB,1990,0.3\nB,1991,0.3\n", schema),
                  ValidationError);
  CHECK_NOTHROW(parse("country,year,alpha\nA,1990,0.3\nA,1991,0.7\nB,1990,0.3\nB,1991,0.3\n", schema));
}

TEST_CASE("duplicate country-year is rejected") {
  CHECK_THROWS_AS(parse("country,year,p\nA,1990,1\nA,1990,2\nB,1990,1\n"), ValidationError);
}

TEST_CASE("malformed rows report the line number") {
  try {
    (void)parse("country,year,p\nA,1990,1\nA,1991,abc\nB,1990,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("country,year,p\nA,1990\n"), ParseError);
  CHECK_THROWS_AS(parse("nation,year,p\nA,1990,1\n"), ParseError);
  CHECK_THROWS_AS(parse("country,year,p\nA,19x0,1\n"), ParseError);
}

TEST_CASE("a single country is below the panel minimum") {
  CHECK_THROWS_AS(parse("country,year,p\nA,1990,1\nA,1991,2\n"), ValidationError);
}

TEST_CASE("select_sample restricts and preserves order") {
  const auto panel = parse(
      "country,year,p\nA,1990,1\nA,1991,2\nB,1990,1\nB,1991,2\nC,1990,1\nC,1991,2\n");
  const auto sub = select_sample(panel, {"C", "A"});
  REQUIRE(sub.countries.size() == 2);
  CHECK(sub.countries[0].country_id == "A");
  CHECK(sub.countries[1].country_id == "C");
  CHECK(panel.countries.size() == 3);
  const auto all = select_sample(panel, {"A", "B", "C"});
  CHECK(all.countries.size() == 3);
  CHECK_THROWS_AS(select_sample(panel, {"XX"}), LookupError);
}

TEST_CASE("write then read is the identity") {
  const auto panel = parse(
      "country,year,p,z\n"
      "A,1990,0.1,\nA,1991,-2.5e-7,3.333333333333333\nA,1992,1e300,4\n"
      "B,1985,1,1\nB,1986,0.30000000000000004,1\n");
  std::ostringstream out;
  write_panel_csv(out, panel);
  const auto back = parse(out.str());
  REQUIRE(back.countries.size() == panel.countries.size());
  for (std::size_t i = 0; i < panel.countries.size(); ++i) {
    const auto& a = panel.countries[i];
    const auto& b = back.countries[i];
    CHECK(a.country_id == b.country_id);
    CHECK(a.first_year == b.first_year);
    REQUIRE(a.values.rows() == b.values.rows());
    for (Eigen::Index r = 0; r < a.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
        if (std::isnan(a.values(r, c))) {
          CHECK(std::isnan(b.values(r, c)));
        } else {
          CHECK(a.values(r, c) == b.values(r, c));
        }
      }
    }
  }
  std::ostringstream again;
  write_panel_csv(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("validation rejects mismatched variable lists and duplicate ids") {
  PanelDataset panel;
  panel.variable_names = {"p"};
  CountrySeries a;
  a.country_id = "A";
  a.first_year = 2000;
  a.variable_names = {"p"};
  a.values = Eigen::MatrixXd::Ones(3, 1);
  panel.countries = {a, a};
  CHECK_THROWS_AS(validate_panel(panel), ValidationError);
  panel.countries[1].country_id = "B";
  CHECK_NOTHROW(validate_panel(panel));
  panel.countries[1].variable_names = {"z"};
  CHECK_THROWS_AS(validate_panel(panel), ValidationError);
}
