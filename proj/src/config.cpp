#include "warpres/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace warpres {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_defaults() {
    static const std::vector<std::pair<std::string, std::string>> d = {
        {"name", "scenario"},
        {"seed", "1"},
        {"workers", "1"},
        {"output.dir", "runs/default"},
        {"manifold.n", "3"},
        {"manifold.warp", "polynomial"},
        {"manifold.warp_param", "1"},
        {"manifold.r0", "1"},
        {"manifold.r1", "auto"},
        {"manifold.c_sharp", "1"},
        {"manifold.spectrum", "sphere"},
        {"potential.kind", "zero"},
        {"potential.segments", ""},
        {"potential.delta", "2"},
        {"potential.envelope_const", "1"},
        {"potential.tail_amplitude", "0"},
        {"potential.tail_start", "0"},
        {"params.h", "0.01"},
        {"params.E", "1"},
        {"params.epsilon_shift", "0.1"},
        {"params.tau0", "1"},
        {"params.t", "20"},
        {"params.b", "auto"},
        {"params.C", "1"},
        {"metric.bound_const", "1"},
        {"metric.directions", "20"},
        {"metric.omega", "identity"},
        {"metric.radii", "10000"},
        {"grid.base_points", "4096"},
        {"grid.r_max_factor", "10"},
        {"grid.refine_points", "256"},
        {"grid.refine_halfwidth", "1e-3"},
        {"weight.mirror", "false"},
        {"sweep.h_list", ""},
        {"sweep.h_min", "0.0031622776601683794"},
        {"sweep.h_max", "0.1"},
        {"sweep.h_count", "7"},
        {"resolvent.ppw", "16"},
        {"resolvent.r_inner", "0"},
        {"resolvent.r_max", "41"},
        {"resolvent.far_boundary", "transparent"},
        {"resolvent.weight_s", "1"},
        {"resolvent.mode_margin", "2"},
        {"resolvent.cutoff_radius", "0"},
        {"resolvent.max_points", "4000000"},
        {"resolvent.max_modes", "200000"},
        {"resolvent.check_rmax", "true"},
        {"resolvent.check_excluded_mode", "true"},
        {"resolvent.energy", "fixed"},
        {"resolvent.trap_radius", "0"},
        {"resolvent.sign", "+1"},
        {"resolvent.sigma_tol", "1e-13"},
        {"fit.log_power", "select"},
        {"carleman.trials", "50"},
        {"carleman.n_points", "4000"},
        {"carleman.h_list", "0.031622776601683794, 0.01"},
        {"carleman.max_mode", "2"},
        {"carleman.waves", "4"},
        {"carleman.length_min", "2"},
        {"carleman.length_max", "6"},
        {"carleman.quasimode", "false"},
        {"carleman.quasimode_offset", "0"},
        {"carleman.quasimode_length", "6"},
        {"carleman.quasimode_points", "4000"},
        {"chain.graph", ""},
        {"chain.beta", "1"},
        {"chain.headroom", "1.01"},
        {"chain.h_list", "0.1, 0.01"},
        {"tau0.lo", "1e-3"},
        {"tau0.hi", "1e3"},
    };
    return d;
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_key_values(ss.str(), path);
}

void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
        kv[trim(o.substr(0, eq))] = trim(o.substr(eq + 1));
    }
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + item + "'");
        }
        if (pos != item.size()) throw ConfigError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

namespace {

class Reader {
public:
    explicit Reader(const KeyValues& kv) {
        for (const auto& [k, v] : config_defaults()) eff_[k] = v;
        for (const auto& [k, v] : kv) {
            if (!eff_.count(k)) unknown_.push_back(k);
            eff_[k] = v;
        }
        if (!unknown_.empty()) {
            std::string msg = "unknown config key(s):";
            for (const auto& k : unknown_) msg += " " + k;
            throw ConfigError(msg);
        }
    }

    const std::string& str(const std::string& key) const { return eff_.at(key); }

    double num(const std::string& key) const {
        const std::string& s = str(key);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": not a number: '" + s + "'");
        }
        if (pos != s.size()) throw ConfigError("key " + key + ": not a number: '" + s + "'");
        return v;
    }

    std::size_t count(const std::string& key) const {
        const double v = num(key);
        if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("key " + key + ": expected a nonnegative integer");
        return static_cast<std::size_t>(v);
    }

    bool flag(const std::string& key) const {
        const std::string s = lower(str(key));
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError("key " + key + ": expected true/false");
    }

    bool is(const std::string& key, const std::string& word) const { return lower(str(key)) == word; }

    void set(const std::string& key, const std::string& value) { eff_[key] = value; }
    const KeyValues& effective() const { return eff_; }

private:
    KeyValues eff_;
    std::vector<std::string> unknown_;
};

std::vector<Segment> parse_segments(const std::string& s) {
    std::vector<Segment> segs;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<double> parts;
        std::string p;
        std::istringstream ps(item);
        while (std::getline(ps, p, ':')) parts.push_back(parse_number_list(p).at(0));
        if (parts.size() != 3) throw ConfigError("potential segment '" + item + "' is not lo:hi:value");
        segs.push_back({parts[0], parts[1], parts[2]});
    }
    return segs;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

RunConfig build_run_config(const KeyValues& kv) {
    Reader R(kv);
    RunConfig c;
    Scenario& sc = c.scenario;
    sc.name = R.str("name");
    sc.seed = static_cast<std::uint64_t>(R.count("seed"));
    c.workers = static_cast<unsigned>(std::max<std::size_t>(1, R.count("workers")));
    c.output_dir = R.str("output.dir");

    ManifoldProfile& pr = sc.profile;
    pr.n = static_cast<int>(R.count("manifold.n"));
    if (R.is("manifold.warp", "polynomial"))
        pr.warp = WarpFamily::polynomial(R.num("manifold.warp_param"));
    else if (R.is("manifold.warp", "exponential"))
        pr.warp = WarpFamily::exponential(R.num("manifold.warp_param"));
    else
        throw ConfigError("manifold.warp must be polynomial or exponential");
    pr.r0 = R.num("manifold.r0");
    pr.c_sharp = R.num("manifold.c_sharp");
    if (!R.is("manifold.spectrum", "sphere")) pr.angular_spectrum = parse_number_list(R.str("manifold.spectrum"));

    const auto segs = parse_segments(R.str("potential.segments"));
    if (R.is("potential.kind", "zero")) {
        if (!segs.empty()) throw ConfigError("potential.kind = zero but segments given");
        sc.potential = PotentialSpec::zero();
    } else if (R.is("potential.kind", "compact")) {
        sc.potential = PotentialSpec::compact(segs);
    } else if (R.is("potential.kind", "decaying")) {
        sc.potential = PotentialSpec::decaying(segs, R.num("potential.delta"), R.num("potential.envelope_const"),
                                               pr.warp, R.num("potential.tail_amplitude"),
                                               R.num("potential.tail_start"));
    } else {
        throw ConfigError("potential.kind must be zero, compact or decaying");
    }

    c.metric_bound_const = R.num("metric.bound_const");
    c.metric_directions = R.count("metric.directions");
    c.metric_random_omega = R.is("metric.omega", "random");
    if (!c.metric_random_omega && !R.is("metric.omega", "identity"))
        throw ConfigError("metric.omega must be identity or random");
    c.metric_radii = R.count("metric.radii");

    CarlemanParams& P = sc.params;
    P.h = R.num("params.h");
    P.E = R.num("params.E");
    P.epsilon_shift = R.num("params.epsilon_shift");
    P.delta = R.num("potential.delta");
    P.tau0 = R.num("params.tau0");
    P.t = R.num("params.t");
    P.ineq_const_C = R.num("params.C");
    P.compact_support = sc.potential.compact_support();
    if (R.is("params.b", "auto")) {
        P.b = b_selection(pr.c_sharp, c.metric_bound_const);
        R.set("params.b", fmt(P.b));
    } else {
        P.b = R.num("params.b");
    }
    if (R.is("manifold.r1", "auto")) {
        pr.r1 = compute_r1(pr.warp, P.b, pr.r0, sc.potential);
        R.set("manifold.r1", fmt(pr.r1));
    } else {
        pr.r1 = R.num("manifold.r1");
    }
    pr.validate();

    c.grid.base_points = R.count("grid.base_points");
    c.grid.r_max_factor = R.num("grid.r_max_factor");
    c.grid.refine_points = R.count("grid.refine_points");
    c.grid.refine_halfwidth = R.num("grid.refine_halfwidth");
    c.weight.mirror = R.flag("weight.mirror");

    sc.h_list = parse_number_list(R.str("sweep.h_list"));
    if (sc.h_list.empty()) {
        const double lo = R.num("sweep.h_min"), hi = R.num("sweep.h_max");
        const std::size_t n = R.count("sweep.h_count");
        if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("sweep range needs 0 < h_min <= h_max, h_count >= 1");
        for (std::size_t i = 0; i < n; ++i) {
            const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
            sc.h_list.push_back(std::exp(std::log(hi) + t * (std::log(lo) - std::log(hi))));
        }
    }
    for (double h : sc.h_list)
        if (!(h > 0.0 && h < 1.0)) throw ConfigError("sweep h values must lie in (0,1)");

    ResolventOptions& ro = sc.resolvent;
    ro.ppw = R.num("resolvent.ppw");
    ro.r_inner = R.num("resolvent.r_inner");
    ro.r_max = R.num("resolvent.r_max");
    if (R.is("resolvent.far_boundary", "transparent"))
        ro.far = FarBoundary::Transparent;
    else if (R.is("resolvent.far_boundary", "dirichlet"))
        ro.far = FarBoundary::Dirichlet;
    else
        throw ConfigError("resolvent.far_boundary must be transparent or dirichlet");
    if (R.is("resolvent.weight_s", "derived")) {
        ro.derived_s = true;
    } else {
        ro.weight_s = R.num("resolvent.weight_s");
        if (!(ro.weight_s > 0.5)) throw ConfigError("resolvent.weight_s must exceed 1/2");
    }
    ro.mode_margin = R.num("resolvent.mode_margin");
    ro.cutoff_radius = R.num("resolvent.cutoff_radius");
    ro.max_points = R.count("resolvent.max_points");
    ro.max_modes = R.count("resolvent.max_modes");
    ro.check_rmax = R.flag("resolvent.check_rmax");
    ro.check_excluded_mode = R.flag("resolvent.check_excluded_mode");
    ro.sigma.tol = R.num("resolvent.sigma_tol");
    ro.workers = c.workers;
    ro.seed = sc.seed;
    if (R.is("resolvent.energy", "fixed"))
        sc.energy = EnergyMode::Fixed;
    else if (R.is("resolvent.energy", "trapped"))
        sc.energy = EnergyMode::Trapped;
    else
        throw ConfigError("resolvent.energy must be fixed or trapped");
    sc.trap_radius = R.num("resolvent.trap_radius");
    if (R.is("resolvent.sign", "+1") || R.is("resolvent.sign", "1") || R.is("resolvent.sign", "plus"))
        c.signs = {1};
    else if (R.is("resolvent.sign", "-1") || R.is("resolvent.sign", "minus"))
        c.signs = {-1};
    else if (R.is("resolvent.sign", "both"))
        c.signs = {1, -1};
    else
        throw ConfigError("resolvent.sign must be +1, -1 or both");

    if (R.is("fit.log_power", "select"))
        c.fit = FitModel::select();
    else if (R.is("fit.log_power", "free"))
        c.fit = FitModel::free();
    else
        c.fit = FitModel::fixed(R.num("fit.log_power"));

    c.carleman.trials_per_h = R.count("carleman.trials");
    c.carleman.n_points = R.count("carleman.n_points");
    c.carleman.workers = c.workers;
    c.carleman.random.max_mode = R.count("carleman.max_mode");
    c.carleman.random.waves_per_mode = R.count("carleman.waves");
    c.carleman.random.length_min = R.num("carleman.length_min");
    c.carleman.random.length_max = R.num("carleman.length_max");
    c.carleman_h = parse_number_list(R.str("carleman.h_list"));
    c.carleman_quasimode = R.flag("carleman.quasimode");
    c.quasimode_offset = R.num("carleman.quasimode_offset");
    c.quasimode_length = R.num("carleman.quasimode_length");
    c.quasimode_points = R.count("carleman.quasimode_points");

    c.chain_graph = R.str("chain.graph");
    c.chain_beta = R.num("chain.beta");
    c.chain_headroom = R.num("chain.headroom");
    c.chain_h = parse_number_list(R.str("chain.h_list"));

    c.tau0_lo = R.num("tau0.lo");
    c.tau0_hi = R.num("tau0.hi");

    c.resolved = R.effective();
    return c;
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
    KeyValues kv = path.empty() ? KeyValues{} : read_key_values(path);
    apply_overrides(kv, overrides);
    return build_run_config(kv);
}

}  // namespace warpres
