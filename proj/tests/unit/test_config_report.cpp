#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "warpres/config.hpp"
#include "warpres/report.hpp"

using namespace warpres;

TEST_CASE("key-value parsing") {
    const KeyValues kv = parse_key_values("# comment\nname = a\n\nparams.h = 0.05  # trailing\n");
    CHECK(kv.at("name") == "a");
    CHECK(kv.at("params.h") == "0.05");
    CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("just text\n"), ConfigError);

    KeyValues o = kv;
    apply_overrides(o, {"params.h=0.01", "seed=4"});
    CHECK(o.at("params.h") == "0.01");
    CHECK(o.at("seed") == "4");
    CHECK_THROWS_AS(apply_overrides(o, {"novalue"}), ConfigError);
}

TEST_CASE("run config defaults and validation") {
    const RunConfig c = build_run_config({});
    CHECK(c.scenario.profile.n == 3);
    CHECK(c.scenario.params.b == 4.0);
    CHECK(c.scenario.profile.r1 >= c.scenario.profile.r0);
    CHECK(c.scenario.h_list.size() == 7);
    CHECK(c.scenario.h_list.front() == doctest::Approx(0.1));
    CHECK(c.scenario.h_list.back() == doctest::Approx(std::pow(10.0, -2.5)));
    CHECK(c.resolved.size() == config_defaults().size());

    CHECK_THROWS_AS(build_run_config({{"params.hh", "1"}}), ConfigError);
    CHECK_THROWS_AS(build_run_config({{"manifold.warp", "spiral"}}), ConfigError);
    CHECK_THROWS_AS(build_run_config({{"params.h", "abc"}}), ConfigError);

    const RunConfig d = build_run_config({{"sweep.h_list", "0.1, 0.05"}, {"resolvent.sign", "both"},
                                          {"potential.kind", "compact"}, {"potential.segments", "1:2:3, 2:2.5:-1"}});
    CHECK(d.scenario.h_list == std::vector<double>{0.1, 0.05});
    CHECK(d.signs == std::vector<int>{1, -1});
    CHECK(d.scenario.potential.segments.size() == 2);
    CHECK(d.scenario.potential(2.2) == -1.0);
}

TEST_CASE("number lists") {
    CHECK(parse_number_list("1, 2.5,3e-1") == std::vector<double>{1.0, 2.5, 0.3});
    CHECK(parse_number_list("").empty());
    CHECK_THROWS(parse_number_list("1, x"));
}

TEST_CASE("numbers survive a text round trip") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) CHECK(std::strtod(fmt_num(v).c_str(), nullptr) == v);
    CHECK(fmt_num(INFINITY) == "inf");
    CHECK(std::isinf(json_to_double(json_num(-INFINITY))));
    CHECK(json_to_double(json_num(0.25)) == 0.25);
}

TEST_CASE("csv tables") {
    CsvTable t;
    t.header = {"h", "norm", "flags"};
    t.add_row({fmt_num(0.1), fmt_num(2.0 / 3.0), ""});
    t.add_row({fmt_num(0.05), fmt_num(1e-20), "coarse_grid;rmax_sensitive"});
    CHECK_THROWS(t.add_row({"1", "2"}));
    CHECK_THROWS(t.add_row({"1", "2", "a,b"}));
    const CsvTable u = parse_csv(t.to_string());
    CHECK(u.header == t.header);
    CHECK(u.rows == t.rows);
    CHECK(u.numbers("norm")[0] == 2.0 / 3.0);
    CHECK(u.to_string() == t.to_string());
}

TEST_CASE("run directory manifest") {
    const std::string dir = (std::filesystem::temp_directory_path() / "warpres_test_rundir").string();
    std::filesystem::remove_all(dir);
    RunDirectory run(dir);
    CsvTable t;
    t.header = {"x"};
    t.add_row({"1"});
    run.csv("a.csv", t);
    run.json("b.json", ordered_json{{"k", 1}});
    run.sidecar_csv("timing.csv", t);
    run.finish("test", ordered_json::object(), ordered_json::object(), 2);
    const ordered_json m = read_json(run.path("manifest.json"));
    CHECK(m["files"].size() == 2);
    CHECK(m["files"][0]["fnv1a64"] == file_digest(run.path("a.csv")));
    CHECK(m["sidecars"][0] == "timing.csv");
    CHECK(std::filesystem::exists(run.path("run_info.json")));
    CHECK(read_text(run.path("b.json")) == read_json(run.path("b.json")).dump(2) + "\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("svg output") {
    const std::string s = svg_plot({"t <1>", "x", "y", true, false}, {{"a&b", {0.1, 0.01}, {1.0, 2.0}}});
    CHECK(s.find("<svg") == 0);
    CHECK(s.find("t &lt;1&gt;") != std::string::npos);
    CHECK(s.find("a&amp;b") != std::string::npos);
}
