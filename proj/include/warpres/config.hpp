#pragma once

#include <map>
#include <string>
#include <vector>

#include "warpres/carleman.hpp"
#include "warpres/fit.hpp"
#include "warpres/phaseweight.hpp"
#include "warpres/resolvent.hpp"

namespace warpres {

// Flat "key = value" text, one scenario per file, '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& source = "<string>");
KeyValues read_key_values(const std::string& path);
// "key=value" strings, as given to --set.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Scenario scenario;
    GridSpec grid;
    WeightOptions weight;
    FitModel fit = FitModel::select();
    std::vector<int> signs{1};

    double metric_bound_const = 1.0;
    std::size_t metric_directions = 20;
    bool metric_random_omega = false;
    std::size_t metric_radii = 10000;

    CarlemanSuiteOptions carleman;
    std::vector<double> carleman_h;
    bool carleman_quasimode = false;
    double quasimode_offset = 0.0;
    double quasimode_length = 6.0;
    std::size_t quasimode_points = 4000;

    std::string chain_graph;
    double chain_beta = 1.0;
    double chain_headroom = 1.01;
    std::vector<double> chain_h{0.1, 0.01};

    double tau0_lo = 1e-3;
    double tau0_hi = 1e3;

    std::string output_dir = "runs/default";
    unsigned workers = 1;

    KeyValues resolved;  // every key with its effective value
};

RunConfig build_run_config(const KeyValues& kv);
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Documented keys with their defaults, in file order.
const std::vector<std::pair<std::string, std::string>>& config_defaults();

std::vector<double> parse_number_list(const std::string& s);

}  // namespace warpres
