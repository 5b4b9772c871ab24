#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pam/error.hpp"
#include "pam/io.hpp"

using namespace pam::io;

TEST_SUITE("io") {
  TEST_CASE("doubles round-trip through text") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
      const double v = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
      CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  }

  TEST_CASE("RFC 4180 quoting round-trips") {
    std::ostringstream out;
    CsvWriter w(out);
    w.comment("run_config {\"a\":1}");
    w.header({"name", "value"});
    w.row({"plain", "1"});
    w.row({"with,comma", "say \"hi\""});
    w.row({"two\nlines", ""});
    CHECK(out.str().find("\r\n") != std::string::npos);
    CHECK(out.str().rfind("# ", 0) == 0);

    std::istringstream in(out.str());
    const auto rows = read_csv(in);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"name", "value"});
    CHECK(rows[2] == std::vector<std::string>{"with,comma", "say \"hi\""});
    CHECK(rows[3] == std::vector<std::string>{"two\nlines", ""});
    CHECK(csv_field("a\"b") == "\"a\"\"b\"");
  }

  TEST_CASE("config parser") {
    std::istringstream in("# comment\n\nbeta = 1.5\nic=delta:0\nbeta=2\n");
    const auto kv = parse_config(in);
    CHECK(kv.at("beta") == "2");
    CHECK(kv.at("ic") == "delta:0");
    CHECK(kv.size() == 2);
    std::istringstream bad("no equals here\n");
    CHECK_THROWS_AS((void)parse_config(bad), pam::Error);
    CHECK_THROWS_AS((void)parse_config_file("/nonexistent/file.cfg"), pam::Error);
  }

  TEST_CASE("svg carries its provenance") {
    std::ostringstream a;
    svg_heatmap(a, {{0.0, 1.0}, {2.0, std::nan("")}}, 0, 1, 0, 1, "heat", "cfg<&>");
    CHECK(a.str().find("<metadata>") != std::string::npos);
    CHECK(a.str().find("cfg&lt;&amp;&gt;") != std::string::npos);
    std::ostringstream b;
    svg_lines(b, {{"s", {0, 1, 2}, {1, 0, 1}}}, "lines", "x", "y", "p");
    CHECK(b.str().find("<polyline") != std::string::npos);
  }
}
