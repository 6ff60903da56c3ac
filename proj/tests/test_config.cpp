#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hbmsim/config.hpp"
#include "hbmsim/csv.hpp"
#include "hbmsim/errors.hpp"

using namespace hbmsim;

TEST_CASE("config files parse sections, scalars, and arrays") {
    const ConfigFile config = ConfigFile::parse_string(R"(
# experiment knobs
top_level = 3

[geometry]
clock_mhz = 200.0
efficiency = 0.93
stacks = 2
calibrated = true
name = "two-stack" # trailing comment

[ubench]
separations_mib = [256, 192, 128, 64, 0]
weights = [1.5, 2.5]
labels = ["a", "b"]
empty = []
)");

    CHECK(config.get_int("", "top_level", 0) == 3);
    CHECK(config.get_double("geometry", "clock_mhz", 0) == 200.0);
    CHECK(config.get_double("geometry", "efficiency", 0) == 0.93);
    CHECK(config.get_int("geometry", "stacks", 0) == 2);
    CHECK(config.get_bool("geometry", "calibrated", false));
    CHECK(config.get_string("geometry", "name", "") == "two-stack");
    CHECK(config.get_int_list("ubench", "separations_mib", {}) ==
          std::vector<std::int64_t>{256, 192, 128, 64, 0});
    CHECK(config.get_double_list("ubench", "weights", {}) == std::vector<double>{1.5, 2.5});
    CHECK(config.get_string_list("ubench", "labels", {}) ==
          std::vector<std::string>{"a", "b"});
    CHECK(config.get_int_list("ubench", "empty", {1}).empty());

    // Fallbacks for absent keys.
    CHECK(config.get_int("geometry", "missing", 7) == 7);
    CHECK(!config.has("geometry", "missing"));
    CHECK(config.has("ubench", "empty"));
}

TEST_CASE("integers promote to doubles but not the reverse") {
    const ConfigFile config = ConfigFile::parse_string("a = 2\nb = 2.5\n");
    CHECK(config.get_double("", "a", 0) == 2.0);
    CHECK_THROWS_AS(config.get_int("", "b", 0), ConfigError);
}

TEST_CASE("malformed lines are rejected with the line number") {
    CHECK_THROWS_AS(ConfigFile::parse_string("novalue\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("a = \"open\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("[broken\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("a = [1, 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("a = what\n"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_file("/nonexistent/config.toml"), IoError);

    try {
        ConfigFile::parse_string("ok = 1\nbad line\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("csv rows are width-checked and formatted stably") {
    CsvWriter csv({"a", "b", "c"});
    csv.cell(1).cell(2.5).cell("x");
    csv.end_row();
    CHECK(csv.str() == "a,b,c\n1,2.5,x\n");

    CsvWriter sloppy({"a", "b"});
    sloppy.cell(1);
    CHECK_THROWS_AS(sloppy.end_row(), ConsistencyError);

    CHECK(CsvWriter::format_double(190.464) == "190.464");
    CHECK(CsvWriter::format_double(1.0 / 3.0) == "0.333333333");
}
