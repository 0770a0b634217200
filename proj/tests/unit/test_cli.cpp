#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "warpres/cli.hpp"

using namespace warpres;
namespace fs = std::filesystem;

namespace {

std::string config(const std::string& name) { return std::string(WARPRES_SOURCE_DIR) + "/configs/" + name; }

std::string scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("warpres_cli_" + name);
    fs::remove_all(p);
    return p.string();
}

CliOptions options(const std::string& cfg, const std::string& out, std::vector<std::string> set = {}) {
    CliOptions o;
    o.config_path = config(cfg);
    o.out_dir = out;
    o.overrides = std::move(set);
    return o;
}

// Small free-particle sweep that runs in well under a second.
const std::vector<std::string> kSmallFree = {"sweep.h_list=0.1, 0.08, 0.065, 0.05, 0.04"};

void check_round_trip(const std::string& dir) {
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string p = e.path().string();
        if (e.path().extension() == ".csv") CHECK(read_csv(p).to_string() == read_text(p));
        if (e.path().extension() == ".json") CHECK(read_json(p).dump(2) + "\n" == read_text(p));
    }
}

}  // namespace

TEST_CASE("profile writes a monotone weight column") {
    const std::string out = scratch("profile");
    const CommandResult r = run_command("profile", options("profile.conf", out));
    REQUIRE(r.exit_code == kExitOk);
    const CsvTable t = read_csv(out + "/profile.csv");
    const auto mu = t.numbers("mu");
    CHECK(std::is_sorted(mu.begin(), mu.end()));
    CHECK(read_json(out + "/certificate.json")["holds"] == true);
    check_round_trip(out);
}

TEST_CASE("profile failure exits with the check code and names the radius") {
    const std::string out = scratch("tau0_fail");
    const CommandResult r = run_command("profile", options("tau0_fail.conf", out));
    CHECK(r.exit_code == kExitCheck);
    const ordered_json c = read_json(out + "/certificate.json");
    CHECK(c["holds"] == false);
    CHECK(c.contains("worst_r"));
    CliOptions o = options("tau0_fail.conf", out);
    o.report_only = true;
    CHECK(run_command("profile", o).exit_code == kExitOk);
}

TEST_CASE("find-tau0 reports an admissible value") {
    const std::string out = scratch("find_tau0");
    CliOptions o = options("profile.conf", out, {"sweep.h_list=0.0024787521766663585, 0.00033546262790251185"});
    o.find_tau0 = true;
    const CommandResult r = run_command("profile", o);
    CHECK(r.exit_code == kExitOk);
    const ordered_json j = read_json(out + "/tau0.json");
    CHECK(j["tau0_star"].is_number());
    CHECK(r.summary_line.find("admissible tau0*") != std::string::npos);
}

TEST_CASE("resolve is byte-reproducible and independent of the worker count") {
    const std::string a = scratch("resolve_a"), b = scratch("resolve_b");
    CliOptions oa = options("free.conf", a, kSmallFree);
    oa.workers = 1;
    CliOptions ob = options("free.conf", b, kSmallFree);
    ob.workers = 3;
    const CommandResult ra = run_command("resolve", oa);
    const CommandResult rb = run_command("resolve", ob);
    REQUIRE(ra.exit_code == kExitOk);
    REQUIRE(rb.exit_code == kExitOk);
    for (const char* f : {"sweep.csv", "per_mode.csv", "resolve.json", "resolvent_norm.svg"})
        CHECK(read_text(a + "/" + f) == read_text(b + "/" + f));
    CHECK(ra.summary_line.find("fitted p=") != std::string::npos);
    CHECK(ra.summary_line.find("predicted p=") != std::string::npos);
    const ordered_json m = read_json(a + "/manifest.json");
    CHECK(std::find(m["sidecars"].begin(), m["sidecars"].end(), "sweep_timing.csv") != m["sidecars"].end());
    check_round_trip(a);
}

TEST_CASE("resolve oracle table") {
    const std::string out = scratch("oracle");
    CliOptions o = options("free.conf", out, {"sweep.h_list=0.1", "resolvent.sign=+1"});
    o.oracle = true;
    REQUIRE(run_command("resolve", o).exit_code == kExitOk);
    const CsvTable t = read_csv(out + "/oracle.csv");
    CHECK(!t.rows.empty());
    for (double d : t.numbers("rel_diff")) CHECK(d < 1e-8);
}

TEST_CASE("resolve propagates flags as a nonzero exit") {
    const std::string out = scratch("flags");
    // two points per wavelength triggers the coarse grid flag
    const CommandResult r =
        run_command("resolve", options("free.conf", out, {"sweep.h_list=0.1, 0.08", "resolvent.r_max=11", "resolvent.ppw=2"}));
    CHECK(r.exit_code == kExitCheck);
    CHECK(!read_json(out + "/resolve.json")["reasons"].empty());
}

TEST_CASE("chain writes a schedule and gamma") {
    const std::string out = scratch("chain");
    const CommandResult r = run_command("chain", options("chain.conf", out));
    REQUIRE(r.exit_code == kExitOk);
    const ordered_json j = read_json(out + "/chain.json");
    CHECK(j["gamma"].get<double>() > 0.0);
    CHECK(read_csv(out + "/chain_kappa.csv").rows.size() == 0 + 1 + 2 + 3 + 4);
}

TEST_CASE("carleman with the mirrored weight passes the metric check") {
    const std::string out = scratch("carleman");
    const CommandResult r = run_command(
        "carleman", options("carleman.conf", out,
                            {"weight.mirror=true", "metric.directions=0", "metric.radii=500", "carleman.trials=3",
                             "carleman.n_points=1000"}));
    const ordered_json j = read_json(out + "/carleman.json");
    CHECK(j["phi_check"]["holds"] == true);
    CHECK(r.exit_code == kExitOk);
    CHECK(read_csv(out + "/carleman_trials.csv").rows.size() == 6);
    CHECK(!read_csv(out + "/carleman_best_C_hist.csv").rows.empty());
}

TEST_CASE("bad input maps to the input exit code") {
    CliOptions o;
    o.config_path = "/nonexistent/file.conf";
    CHECK(run_command("profile", o).exit_code == kExitInput);
    CHECK(run_command("profile", options("profile.conf", scratch("bad"), {"params.hh=1"})).exit_code == kExitInput);
    CHECK(run_command("nonsense", options("profile.conf", scratch("bad"))).exit_code == kExitInput);
}

TEST_CASE("graph json round trip") {
    const BallCoverGraph g = BallCoverGraph::star(4, 0.2, 1.5);
    const BallCoverGraph h = graph_from_json(graph_to_json(g));
    CHECK(h.balls == 4);
    CHECK(h.edges == g.edges);
    CHECK(h.rho == 0.2);
    CHECK(h.lambda_carleman == 1.5);
}
