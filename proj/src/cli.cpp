#include "warpres/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "warpres/carleman.hpp"
#include "warpres/parallel.hpp"
#include "warpres/rng.hpp"

namespace warpres {

namespace {

const char* branch_name(Branch b) { return b == Branch::Left ? "left" : "right"; }

ordered_json config_json(const RunConfig& cfg) {
    ordered_json j = ordered_json::object();
    // The worker count goes to run_info.json; results do not depend on it.
    for (const auto& [k, v] : cfg.resolved)
        if (k != "workers") j[k] = v;
    return j;
}

ordered_json params_json(const CarlemanParams& P) {
    ordered_json j;
    j["h"] = P.h;
    j["E"] = P.E;
    j["epsilon_shift"] = P.epsilon_shift;
    j["delta"] = P.delta;
    j["tau0"] = P.tau0;
    j["t"] = P.t;
    j["b"] = P.b;
    j["C"] = P.ineq_const_C;
    j["compact_support"] = P.compact_support;
    return j;
}

ordered_json scales_json(const DerivedScales& S) {
    ordered_json j;
    j["epsilon_log"] = S.epsilon_log;
    j["s"] = S.s;
    j["lambda_loglog"] = S.lambda_loglog;
    j["m0"] = S.m0;
    j["m"] = S.m;
    j["log_a"] = S.log_a;
    j["a"] = json_num(S.a);
    j["tau"] = S.tau;
    return j;
}

ordered_json fit_json(const ExponentFit& f) {
    ordered_json j;
    j["c"] = json_num(f.c);
    j["p"] = json_num(f.p);
    j["q"] = json_num(f.q);
    j["residual"] = json_num(f.residual);
    j["h_min"] = f.h_min;
    j["h_max"] = f.h_max;
    j["n_points"] = f.n_points;
    j["mode"] = f.mode == LogPowerMode::Fixed ? "fixed" : f.mode == LogPowerMode::Free ? "free" : "select_0_1";
    j["non_monotone"] = f.non_monotone;
    j["p_drop_largest"] = json_num(f.p_drop_largest);
    j["stable"] = f.stable;
    return j;
}

ordered_json point_json(const PointValues& p) {
    ordered_json j;
    j["r"] = json_num(p.r);
    j["branch"] = branch_name(p.branch);
    j["margin"] = json_num(p.margin);
    j["A_norm"] = json_num(p.A_norm);
    j["B_norm"] = json_num(p.B_norm);
    return j;
}

std::string out_dir(const RunConfig& cfg, const CliOptions& opts) {
    return opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string s;
    for (const auto& f : flags) s += (s.empty() ? "" : ";") + f;
    return s;
}

}  // namespace

RunConfig resolve_config(const CliOptions& opts) {
    std::vector<std::string> ov = opts.overrides;
    if (opts.seed) ov.push_back("seed=" + std::to_string(*opts.seed));
    if (opts.workers) ov.push_back("workers=" + std::to_string(*opts.workers));
    return load_run_config(opts.config_path, ov);
}

CommandResult cmd_profile(const RunConfig& cfg, const CliOptions& opts) {
    const Scenario& sc = cfg.scenario;
    const CarlemanParams& P = sc.params;
    RunDirectory run(out_dir(cfg, opts));
    const DerivedScales S = derive_scales(P, sc.profile.warp, sc.potential);
    const WeightPhaseProfile prof = build_profile(P, S, sc.profile, cfg.grid, cfg.weight);
    const KeyInequalityReport rep = check_key_inequality(prof, P, S, P.E);

    CsvTable t;
    t.header = {"r", "mu", "mu_prime", "phi", "phi_prime", "phi_second", "A", "B", "margin"};
    for (std::size_t i = 0; i < prof.grid.size(); ++i)
        t.add_row({fmt_num(prof.grid[i]), fmt_num(prof.mu[i]), fmt_num(prof.mu_prime[i]), fmt_num(prof.phi[i]),
                   fmt_num(prof.phi_prime[i]), fmt_num(prof.phi_second[i]), fmt_num(prof.A[i]), fmt_num(prof.B[i]),
                   fmt_num(rep.margin[i])});
    run.csv("profile.csv", t);

    const RatioBounds rb = check_ratio_bounds(prof, S);
    ordered_json cert;
    cert["params"] = params_json(P);
    cert["scales"] = scales_json(S);
    cert["r1"] = prof.r1;
    cert["holds"] = rep.holds;
    cert["worst_r"] = json_num(rep.worst_r);
    cert["worst_branch"] = branch_name(rep.worst_branch);
    ordered_json ms;
    ms["worst"] = json_num(rep.worst_margin);
    ms["worst_left"] = json_num(rep.worst_margin_left);
    ms["worst_right"] = json_num(rep.worst_margin_right);
    ms["at_a_left"] = json_num(rep.margin_left_at_a);
    ms["at_a_right"] = json_num(rep.margin_right_at_a);
    cert["margins"] = ms;
    cert["at_a_left"] = point_json(prof.at_a_left);
    cert["at_a_right"] = point_json(prof.at_a_right);
    cert["ratio_bounds"] = {{"c32", json_num(rb.c32)}, {"c33", json_num(rb.c33)}};
    cert["h2_muq0_prime_over_mu_prime_max"] = json_num(muq0_surrogate(prof, P.h));
    cert["phase_max"] = json_num(phase_max(prof));
    cert["grid_points"] = prof.grid.size();
    run.json("certificate.json", cert);

    CommandResult res;
    res.summary["holds"] = rep.holds;
    res.summary["worst_margin"] = json_num(rep.worst_margin);
    res.summary["worst_r"] = json_num(rep.worst_r);
    res.summary_line = "profile: h=" + fmt_num(P.h) + " a=" + fmt_num(S.a) + " holds=" + (rep.holds ? "true" : "false") +
                       " worst_margin=" + fmt_num(rep.worst_margin) + " at r=" + fmt_num(rep.worst_r) + " (" +
                       branch_name(rep.worst_branch) + ")";
    bool ok = rep.holds;

    if (opts.find_tau0) {
        ordered_json tj;
        tj["h_list"] = sc.h_list;
        tj["tau0_lo"] = cfg.tau0_lo;
        tj["tau0_hi"] = cfg.tau0_hi;
        try {
            const Tau0Result tr =
                find_admissible_tau0(P, sc.profile, sc.potential, sc.h_list, cfg.tau0_lo, cfg.tau0_hi, cfg.grid);
            tj["tau0_star"] = tr.tau0_star;
            tj["holds_at_double"] = tr.holds_at_double;
            ordered_json per = ordered_json::array();
            for (const auto& f : tr.margins_at_star)
                per.push_back({{"h", f.h}, {"worst_r", json_num(f.worst_r)}, {"worst_margin", json_num(f.worst_margin)}});
            tj["margins_at_star"] = per;
            res.summary["tau0_star"] = tr.tau0_star;
            res.summary_line += "\nadmissible tau0* = " + fmt_num(tr.tau0_star);
            ok = ok && tr.holds_at_double;
        } catch (const Tau0Error& e) {
            tj["tau0_star"] = nullptr;
            tj["error"] = e.what();
            ordered_json per = ordered_json::array();
            for (const auto& f : e.failures)
                per.push_back({{"h", f.h}, {"worst_r", json_num(f.worst_r)}, {"worst_margin", json_num(f.worst_margin)}});
            tj["failures"] = per;
            res.summary["tau0_star"] = nullptr;
            res.summary_line += "\nno admissible tau0: " + std::string(e.what());
            ok = false;
        }
        run.json("tau0.json", tj);
    }
    run.finish("profile", config_json(cfg), res.summary, cfg.workers);
    res.run_dir = run.dir();
    res.exit_code = ok || opts.report_only ? kExitOk : kExitCheck;
    return res;
}

CommandResult cmd_sweep(const RunConfig& cfg, const CliOptions& opts) {
    const Scenario& sc = cfg.scenario;
    RunDirectory run(out_dir(cfg, opts));
    const std::size_t n = sc.h_list.size();
    struct Row {
        DerivedScales S;
        double pmax = 0.0;
        KeyInequalityReport rep;
    };
    std::vector<Row> rows(n);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
        CarlemanParams P = sc.params;
        P.h = sc.h_list[i];
        rows[i].S = derive_scales(P, sc.profile.warp, sc.potential);
        const WeightPhaseProfile prof = build_profile(P, rows[i].S, sc.profile, cfg.grid, cfg.weight);
        rows[i].pmax = phase_max(prof);
        rows[i].rep = check_key_inequality(prof, P, rows[i].S, P.E);
    });
    CsvTable t;
    t.header = {"h", "a", "tau", "phase_max", "phase_max_over_h", "worst_margin", "worst_r", "worst_branch", "holds"};
    std::vector<double> hs, y;
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
        const Row& r = rows[i];
        t.add_row({fmt_num(sc.h_list[i]), fmt_num(r.S.a), fmt_num(r.S.tau), fmt_num(r.pmax),
                   fmt_num(r.pmax / sc.h_list[i]), fmt_num(r.rep.worst_margin), fmt_num(r.rep.worst_r),
                   branch_name(r.rep.worst_branch), r.rep.holds ? "1" : "0"});
        hs.push_back(sc.h_list[i]);
        y.push_back(r.pmax / sc.h_list[i]);
        all = all && r.rep.holds;
    }
    run.csv("sweep_profile.csv", t);
    const BoundExponent be = predicted_bound_exponent(sc.profile, sc.potential);
    ordered_json j;
    j["predicted"] = {{"p", be.p}, {"q", be.log_power}};
    CommandResult res;
    if (n >= 5) {
        const ExponentFit f = fit_exponent(hs, y, cfg.fit);
        j["fit"] = fit_json(f);
        res.summary_line = "phase scaling: fitted p=" + fmt_num(f.p) + " q=" + fmt_num(f.q) + " | predicted p=" +
                           fmt_num(be.p) + " q=" + fmt_num(be.log_power);
        res.summary["p"] = f.p;
        res.summary["q"] = f.q;
    } else {
        j["fit"] = nullptr;
        res.summary_line = "phase scaling: fewer than 5 h values, no fit";
    }
    j["key_inequality_all"] = all;
    run.json("phase_scaling.json", j);
    run.svg("phase_scaling.svg", svg_plot({"max phi / h", "h", "max phi / h", true, true}, {{"measured", hs, y}}));
    res.summary["key_inequality_all"] = all;
    res.summary_line += all ? "\nkey inequality holds at every h" : "\nkey inequality fails for some h";
    run.finish("sweep", config_json(cfg), res.summary, cfg.workers);
    res.run_dir = run.dir();
    res.exit_code = all || opts.report_only ? kExitOk : kExitCheck;
    return res;
}

CommandResult cmd_carleman(const RunConfig& cfg, const CliOptions& opts) {
    const Scenario& sc = cfg.scenario;
    const CarlemanParams& P = sc.params;
    RunDirectory run(out_dir(cfg, opts));
    const DerivedScales S = derive_scales(P, sc.profile.warp, sc.potential);
    const WeightPhase wp(P, S, sc.profile, cfg.weight);
    CommandResult res;
    bool ok = true;

    // Matrix inequality.
    const std::size_t d = static_cast<std::size_t>(std::max(1, sc.profile.n - 1));
    const Eigen::MatrixXd omega = cfg.metric_random_omega
                                      ? random_omega(d, sc.profile.c_sharp, mix_seed(sc.seed, 101))
                                      : Eigen::MatrixXd(sc.profile.c_sharp * Eigen::MatrixXd::Identity(d, d));
    const std::vector<double> radii =
        log_grid(sc.profile.r1, cfg.grid.r_max_factor * wp.a(), std::max<std::size_t>(2, cfg.metric_radii));
    CsvTable pt;
    pt.header = {"direction", "max_eigenvalue", "max_left", "max_right", "worst_r", "holds"};
    bool phi_all = true;
    double phi_max = -1e300;
    for (std::size_t k = 0; k <= cfg.metric_directions; ++k) {
        MetricPerturbation mp =
            k == 0 ? MetricPerturbation::exact(omega, cfg.metric_bound_const)
                   : MetricPerturbation::constant(omega, cfg.metric_bound_const,
                                                  random_unit_symmetric(d, mix_seed(sc.seed, 202, k)),
                                                  random_unit_symmetric(d, mix_seed(sc.seed, 303, k)));
        mp.validate(sc.profile.c_sharp, {sc.profile.r1});
        const PhiCheckResult pc = phi_matrix_check(mp, wp, radii);
        pt.add_row({k == 0 ? "exact" : "random_" + std::to_string(k), fmt_num(pc.max_eigenvalue),
                    fmt_num(pc.max_left), fmt_num(pc.max_right), fmt_num(pc.worst_r), pc.holds ? "1" : "0"});
        phi_all = phi_all && pc.holds;
        phi_max = std::max(phi_max, pc.max_eigenvalue);
    }
    run.csv("phi_check.csv", pt);
    ok = ok && phi_all;

    // Derivative identity on one random function at two resolutions.
    const TestFunctionSpec fspec = random_test_function(mix_seed(sc.seed, 404), sc.profile.r1, P.h, P.E, cfg.carleman.random);
    const FIdentityResult f1 = F_identity_check(wp, fspec.sample(cfg.carleman.n_points), sc.potential);
    const FIdentityResult f2 = F_identity_check(wp, fspec.sample(2 * cfg.carleman.n_points - 1), sc.potential);

    // Random suite.
    const CarlemanSuite suite = carleman_suite(sc.profile, sc.potential, P, cfg.carleman_h, sc.seed, cfg.carleman);
    CsvTable tt;
    tt.header = {"h", "seed", "length", "n_points", "log_lhs", "log_rhs_resolvent", "log_rhs_epsilon", "best_C",
                 "best_C_refined"};
    std::vector<double> lc;
    for (const auto& t : suite.trials) {
        tt.add_row({fmt_num(t.h), fmt_int(t.seed), fmt_num(t.length), fmt_int(t.n_points), fmt_num(t.ratio.log_lhs),
                    fmt_num(t.ratio.log_rhs_resolvent), fmt_num(t.ratio.log_rhs_epsilon), fmt_num(t.ratio.best_C),
                    fmt_num(t.ratio_refined.best_C)});
        lc.push_back(std::log10(t.ratio.best_C));
    }
    run.csv("carleman_trials.csv", tt);
    CsvTable hist;
    hist.header = {"log10_best_C_lo", "log10_best_C_hi", "count"};
    if (!lc.empty()) {
        const double lo = std::floor(*std::min_element(lc.begin(), lc.end()) * 4.0) / 4.0;
        const double hi = std::ceil(*std::max_element(lc.begin(), lc.end()) * 4.0) / 4.0 + 0.25;
        for (double b = lo; b < hi - 1e-12; b += 0.25) {
            const auto c = std::count_if(lc.begin(), lc.end(), [&](double v) { return v >= b && v < b + 0.25; });
            hist.add_row({fmt_num(b), fmt_num(b + 0.25), fmt_int(static_cast<std::uint64_t>(c))});
        }
    }
    run.csv("carleman_best_C_hist.csv", hist);
    const double growth = suite.max_best_C > 0.0 ? suite.max_best_C_refined / suite.max_best_C : 0.0;
    ok = ok && growth < 1.25;

    ordered_json j;
    j["params"] = params_json(P);
    j["scales"] = scales_json(S);
    j["phi_check"] = {{"holds", phi_all},
                      {"max_eigenvalue", json_num(phi_max)},
                      {"directions", cfg.metric_directions},
                      {"radii", radii.size()},
                      {"b", wp.mu_shift()}};
    j["F_identity"] = {{"n_points", cfg.carleman.n_points},
                       {"residual", json_num(f1.max_residual)},
                       {"residual_refined", json_num(f2.max_residual)},
                       {"max_derivative", json_num(f1.max_derivative)},
                       {"refinement_ratio", json_num(f2.max_residual > 0 ? f1.max_residual / f2.max_residual : 0.0)}};
    j["suite"] = {{"h_list", cfg.carleman_h},
                  {"trials_per_h", cfg.carleman.trials_per_h},
                  {"n_points", cfg.carleman.n_points},
                  {"n_points_refined", 2 * cfg.carleman.n_points - 1},
                  {"max_best_C", json_num(suite.max_best_C)},
                  {"max_best_C_refined", json_num(suite.max_best_C_refined)},
                  {"growth", json_num(growth)}};
    if (cfg.carleman_quasimode) {
        ordered_json qa = ordered_json::array();
        for (double h : cfg.carleman_h) {
            CarlemanParams Q = P;
            Q.h = h;
            const DerivedScales QS = derive_scales(Q, sc.profile.warp, sc.potential);
            const WeightPhase qwp(Q, QS, sc.profile, cfg.weight);
            const double lo = sc.profile.r1 + cfg.quasimode_offset;
            const Quasimode qm = build_quasimode(sc.profile, sc.potential, h, lo, lo + cfg.quasimode_length,
                                                 cfg.quasimode_points, P.E, &qwp);
            Q.E = qm.energy;
            const DerivedScales QS2 = derive_scales(Q, sc.profile.warp, sc.potential);
            const WeightPhase qwp2(Q, QS2, sc.profile, cfg.weight);
            const CarlemanRatio cr = carleman_ratio(qm.u, sc.profile, sc.potential, Q, QS2, qwp2);
            qa.push_back({{"h", h},
                          {"energy", qm.energy},
                          {"log_lhs", json_num(cr.log_lhs)},
                          {"log_rhs_resolvent", json_num(cr.log_rhs_resolvent)},
                          {"log_rhs_epsilon", json_num(cr.log_rhs_epsilon)},
                          {"best_C", json_num(cr.best_C)},
                          {"epsilon_dominates", cr.epsilon_dominates}});
        }
        j["quasimode"] = qa;
    }
    run.json("carleman.json", j);

    res.summary["phi_holds"] = phi_all;
    res.summary["max_best_C"] = json_num(suite.max_best_C);
    res.summary["growth"] = json_num(growth);
    res.summary_line = std::string("phi check: ") + (phi_all ? "holds" : "fails") + " (max eigenvalue " +
                       fmt_num(phi_max) + ")\ncarleman suite: max best_C " + fmt_num(suite.max_best_C) + " -> " +
                       fmt_num(suite.max_best_C_refined) + " under grid doubling (growth " + fmt_num(growth) + ")";
    run.finish("carleman", config_json(cfg), res.summary, cfg.workers);
    res.run_dir = run.dir();
    res.exit_code = ok || opts.report_only ? kExitOk : kExitCheck;
    return res;
}

CommandResult cmd_resolve(const RunConfig& cfg, const CliOptions& opts) {
    const Scenario& sc = cfg.scenario;
    RunDirectory run(out_dir(cfg, opts));
    CsvTable st, pm, timing, oracle;
    st.header = {"sign",   "h_nominal", "h",          "E",           "norm",      "log_norm",
                 "h_log_norm", "dominant_mode", "n_points", "modes_used", "rmax_change", "excluded_mode_norm_ratio",
                 "flags"};
    pm.header = {"sign", "h", "mode", "lambda", "sigma_min", "converged"};
    timing.header = {"sign", "h", "time_ms"};
    oracle.header = {"sign", "h", "mode", "n_points", "sigma_banded", "sigma_dense", "rel_diff"};
    const BoundExponent be = predicted_bound_exponent(sc.profile, sc.potential);
    ordered_json per_sign = ordered_json::array();
    ordered_json reasons = ordered_json::array();
    std::vector<PlotSeries> series;
    CommandResult res;
    std::string line;
    for (int sign : cfg.signs) {
        const SweepResult sw = h_sweep(sc, sc.h_list, sign);
        const std::string sg = sign > 0 ? "+1" : "-1";
        PlotSeries ps{"log norm (" + sg + ")", {}, {}};
        for (std::size_t i = 0; i < sw.entries.size(); ++i) {
            const SweepEntry& e = sw.entries[i];
            const double ln = std::log(e.norm);
            st.add_row({sg, fmt_num(e.h_nominal), fmt_num(e.h), fmt_num(e.E), fmt_num(e.norm), fmt_num(ln),
                        fmt_num(e.h * ln), fmt_int(e.dominant_mode), fmt_int(e.n_points), fmt_int(e.modes_used),
                        fmt_num(e.rmax_change), fmt_num(e.excluded_mode_norm / e.norm), join_flags(e.flags)});
            for (const auto& m : e.per_mode)
                pm.add_row({sg, fmt_num(e.h), fmt_int(m.mode), fmt_num(m.lambda), fmt_num(m.sigma),
                            m.converged ? "1" : "0"});
            timing.add_row({sg, fmt_num(e.h), fmt_num(e.time_ms)});
            for (const auto& f : e.flags) reasons.push_back({{"sign", sign}, {"h", e.h}, {"flag", f}});
            ps.x.push_back(e.h);
            ps.y.push_back(ln);
            if (opts.oracle && e.n_points <= sc.resolvent.sigma.dense_fallback_max) {
                CarlemanParams p = sc.params;
                p.h = e.h;
                p.E = e.E;
                ResolventOptions ro = sc.resolvent;
                const double dr = sc.energy == EnergyMode::Trapped
                                      ? grid_spacing(e.h_nominal, sc.params.E, sc.potential.max_abs(), ro.ppw)
                                      : grid_spacing(e.h, e.E, sc.potential.max_abs(), ro.ppw);
                const double r_lo = ro.r_inner > 0.0 ? ro.r_inner : sc.profile.r0;
                const RadialGrid g = make_radial_grid(r_lo, ro.r_max, dr);
                const double s = ro.derived_s ? 0.5 * (1.0 + 1.0 / std::log(1.0 / e.h)) : ro.weight_s;
                const ModeOperator op = build_mode_operator(sc.profile, sc.potential, p, e.dominant_mode, g, sign,
                                                            ro.far, s, r_lo + 1.0);
                SigmaOptions so = ro.sigma;
                so.seed = mix_seed(sc.seed, i, 77);
                const double sb = sigma_min(op, true, so).sigma;
                const double sd = dense_sigma_min(op.assemble(true));
                oracle.add_row({sg, fmt_num(e.h), fmt_int(e.dominant_mode), fmt_int(g.r.size()), fmt_num(sb),
                                fmt_num(sd), fmt_num(std::abs(sb - sd) / sd)});
            }
        }
        series.push_back(ps);
        ordered_json sj;
        sj["sign"] = sign;
        sj["predicted"] = {{"p", be.p}, {"q", be.log_power}};
        const BoundCheck bc = bound_check(sw, be.p, be.log_power);
        sj["bound_check"] = {{"consistent", bc.consistent}, {"implied_C", json_num(bc.implied_C)}, {"per_h", bc.per_h}};
        sj["dominating_constant"] = json_num(dominating_constant(sw, be.p, be.log_power));
        if (!bc.consistent) reasons.push_back({{"sign", sign}, {"flag", "bound_shape_exceeded"}});
        bool fitted = false;
        const auto ln = sw.log_norm();
        if (sw.entries.size() >= 5 && std::all_of(ln.begin(), ln.end(), [](double v) { return v > 0.0; })) {
            const ExponentFit f = fit_sweep(sw, cfg.fit);
            sj["fit"] = fit_json(f);
            fitted = true;
            line += "sign " + sg + ": fitted p=" + fmt_num(f.p) + " q=" + fmt_num(f.q) + " c=" + fmt_num(f.c) +
                    " | predicted p=" + fmt_num(be.p) + " q=" + fmt_num(be.log_power) +
                    " | consistent=" + (bc.consistent ? "true" : "false") + "\n";
            res.summary["p_" + sg] = f.p;
            res.summary["q_" + sg] = f.q;
        } else {
            sj["fit"] = nullptr;
        }
        if (!fitted)
            line += "sign " + sg + ": no fit (needs >= 5 points with log norm > 0) | predicted p=" + fmt_num(be.p) +
                    " q=" + fmt_num(be.log_power) + " | consistent=" + (bc.consistent ? "true" : "false") + "\n";
        if (sc.energy == EnergyMode::Trapped) {
            ordered_json tab = ordered_json::array();
            for (const auto& e : sw.entries)
                tab.push_back({{"h", e.h}, {"E", e.E}, {"h_log_norm", e.h * std::log(e.norm)}});
            sj["h_log_norm"] = tab;
        }
        per_sign.push_back(sj);
    }
    run.csv("sweep.csv", st);
    run.csv("per_mode.csv", pm);
    run.sidecar_csv("sweep_timing.csv", timing);
    if (opts.oracle) run.csv("oracle.csv", oracle);
    run.svg("resolvent_norm.svg", svg_plot({"log cutoff resolvent norm", "h", "log ||R||", true, false}, series));

    ordered_json j;
    j["scenario"] = sc.name;
    j["energy_mode"] = sc.energy == EnergyMode::Trapped ? "trapped" : "fixed";
    j["sweeps"] = per_sign;
    j["reasons"] = reasons;
    run.json("resolve.json", j);
    res.summary["reasons"] = reasons.size();
    if (!line.empty() && line.back() == '\n') line.pop_back();
    res.summary_line = line;
    run.finish("resolve", config_json(cfg), res.summary, cfg.workers);
    res.run_dir = run.dir();
    res.exit_code = reasons.empty() || opts.report_only ? kExitOk : kExitCheck;
    return res;
}

BallCoverGraph graph_from_json(const ordered_json& j) {
    BallCoverGraph g;
    g.balls = j.at("balls").get<std::size_t>();
    g.rho = j.value("rho", 0.1);
    g.lambda_carleman = j.value("lambda", 1.0);
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw std::invalid_argument("graph edge must be a pair");
        g.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
    g.validate();
    return g;
}

ordered_json graph_to_json(const BallCoverGraph& g) {
    ordered_json j;
    j["balls"] = g.balls;
    j["rho"] = g.rho;
    j["lambda"] = g.lambda_carleman;
    ordered_json e = ordered_json::array();
    for (const auto& [a, b] : g.edges) e.push_back({a, b});
    j["edges"] = e;
    return j;
}

CommandResult cmd_chain(const RunConfig& cfg, const CliOptions& opts) {
    if (cfg.chain_graph.empty()) throw ConfigError("chain.graph must name a JSON graph file");
    std::filesystem::path gp(cfg.chain_graph);
    if (gp.is_relative() && !std::filesystem::exists(gp) && !opts.config_path.empty())
        gp = std::filesystem::path(opts.config_path).parent_path() / gp;
    const BallCoverGraph g = graph_from_json(read_json(gp.string()));
    RunDirectory run(out_dir(cfg, opts));
    const ChainCoefficients cc = chain_coefficients(g.lambda_carleman, g.rho);
    const GammaReport gr = gamma_aggregate(g, cc.c1, cc.c2, cfg.chain_beta, cfg.chain_headroom);
    CsvTable kt;
    kt.header = {"target", "chain_length", "position", "kappa"};
    bool ok = true;
    double worst_violation = -1e300;
    std::size_t longest = 0;
    for (std::size_t t = 0; t < gr.chains.size(); ++t) {
        const auto& sched = gr.schedules[t];
        for (std::size_t k = 0; k < sched.size(); ++k)
            kt.add_row({fmt_int(t + 1), fmt_int(gr.chains[t].size()), fmt_int(k + 2), fmt_num(sched[k])});
        if (!sched.empty()) worst_violation = std::max(worst_violation, schedule_violation(sched, cc.c1, cc.c2, cfg.chain_beta));
        if (gr.chains[t].size() > gr.chains[longest].size()) longest = t;
    }
    run.csv("chain_kappa.csv", kt);
    if (worst_violation > 1e-12) ok = false;
    ordered_json j;
    j["label"] = "chain contribution to gamma only";
    j["graph"] = graph_to_json(g);
    j["c1"] = cc.c1;
    j["c2"] = cc.c2;
    j["beta"] = cfg.chain_beta;
    j["headroom"] = gr.headroom;
    j["gamma"] = gr.gamma;
    j["trivial"] = gr.trivial;
    j["gamma_i"] = gr.gamma_i;
    j["chains"] = gr.chains;
    j["schedule_violation"] = json_num(worst_violation);
    ordered_json qs = ordered_json::array();
    const auto& ls = gr.schedules[longest];
    if (!ls.empty()) {
        const double L = static_cast<double>(ls.size() + 1);
        for (double h : cfg.chain_h) {
            const QFactors q = q_factors(ls, cc.c1, cc.c2, h);
            const double bound = std::log(L) - 2.0 * cfg.chain_beta * std::pow(h, -4.0 / 3.0);
            const bool q2ok = q.log_Q2 <= bound + 1e-12 * std::abs(bound);
            ok = ok && q2ok;
            qs.push_back({{"h", h},
                          {"L", ls.size() + 1},
                          {"log_Q1", json_num(q.log_Q1)},
                          {"log_Q2", json_num(q.log_Q2)},
                          {"log_Q3", json_num(q.log_Q3)},
                          {"log_Q2_bound", json_num(bound)},
                          {"log_Q2_ok", q2ok}});
        }
    }
    j["q_factors_longest_chain"] = qs;
    run.json("chain.json", j);
    CommandResult res;
    res.summary["gamma"] = gr.gamma;
    res.summary["ok"] = ok;
    res.summary_line = "chain: c1=" + fmt_num(cc.c1) + " c2=" + fmt_num(cc.c2) + " gamma=" + fmt_num(gr.gamma) +
                       " (longest chain " + std::to_string(gr.chains[longest].size()) + ")";
    run.finish("chain", config_json(cfg), res.summary, cfg.workers);
    res.run_dir = run.dir();
    res.exit_code = ok || opts.report_only ? kExitOk : kExitCheck;
    return res;
}

CommandResult run_command(const std::string& name, const CliOptions& opts) {
    CommandResult res;
    try {
        const RunConfig cfg = resolve_config(opts);
        if (name == "profile") return cmd_profile(cfg, opts);
        if (name == "sweep") return cmd_sweep(cfg, opts);
        if (name == "carleman") return cmd_carleman(cfg, opts);
        if (name == "resolve") return cmd_resolve(cfg, opts);
        if (name == "chain") return cmd_chain(cfg, opts);
        res.exit_code = kExitInput;
        res.summary_line = "unknown subcommand " + name;
    } catch (const ConfigError& e) {
        res.exit_code = kExitInput;
        res.summary_line = std::string("config error: ") + e.what();
    } catch (const ChainError& e) {
        res.exit_code = kExitInput;
        res.summary_line = std::string("chain error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        res.exit_code = kExitInput;
        res.summary_line = std::string("invalid input: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitError;
        res.summary_line = std::string("error: ") + e.what();
    }
    return res;
}

}  // namespace warpres
