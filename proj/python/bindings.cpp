#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "warpres/chain.hpp"
#include "warpres/cli.hpp"
#include "warpres/config.hpp"
#include "warpres/geometry.hpp"
#include "warpres/phaseweight.hpp"
#include "warpres/resolvent.hpp"
#include "warpres/tridiag.hpp"

namespace py = pybind11;
using namespace warpres;

namespace {

RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
    return load_run_config(path, overrides);
}

py::dict cutoff_norm(const std::string& path, const std::vector<std::string>& overrides, int sign) {
    const RunConfig cfg = load(path, overrides);
    const Scenario& sc = cfg.scenario;
    CutoffNorm cn;
    {
        py::gil_scoped_release nogil;
        cn = cutoff_resolvent_norm(sc.profile, sc.potential, sc.params, sc.resolvent, sign);
    }
    py::dict d;
    d["norm"] = cn.norm;
    d["dominant_mode"] = cn.dominant_mode;
    d["modes_used"] = cn.modes_used;
    d["n_points"] = cn.n_points;
    d["rmax_change"] = cn.rmax_change;
    d["flags"] = cn.flags;
    return d;
}

py::dict phase_profile(const std::string& path, const std::vector<std::string>& overrides) {
    const RunConfig cfg = load(path, overrides);
    const Scenario& sc = cfg.scenario;
    const DerivedScales scales = derive_scales(sc.params, sc.profile.warp, sc.potential);
    const WeightPhaseProfile prof = build_profile(sc.params, scales, sc.profile, cfg.grid, cfg.weight);
    const KeyInequalityReport key = check_key_inequality(prof, sc.params, scales, sc.params.E);
    py::dict d;
    d["r1"] = prof.r1;
    d["a"] = prof.a;
    d["phase_max"] = phase_max(prof);
    d["key_inequality_holds"] = key.holds;
    d["worst_margin"] = key.worst_margin;
    d["r"] = prof.grid;
    d["phi"] = prof.phi;
    return d;
}

Tridiag make_tridiag(std::vector<cplx> sub, std::vector<cplx> diag, std::vector<cplx> sup) {
    Tridiag A{std::move(sub), std::move(diag), std::move(sup)};
    A.validate();
    return A;
}

}  // namespace

PYBIND11_MODULE(_warpres, m) {
    m.doc() = "Resolvent bounds on warped ends: core routines";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ChainError>(m, "ChainError", PyExc_ValueError);

    m.def("resolved_config", [](const std::string& path, const std::vector<std::string>& overrides) {
        return load(path, overrides).resolved;
    }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});

    m.def("predicted_exponent", [](const std::string& path, const std::vector<std::string>& overrides) {
        const RunConfig cfg = load(path, overrides);
        const BoundExponent b = predicted_bound_exponent(cfg.scenario.profile, cfg.scenario.potential);
        return py::make_tuple(b.p, b.log_power);
    }, py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
       "(p, q) in log ||R|| <= C + h^-p (log 1/h)^q.");

    m.def("q0", [](const std::string& path, double r) {
        return q0_eval(load(path, {}).scenario.profile, r);
    }, py::arg("path"), py::arg("r"));

    m.def("phase_profile", &phase_profile, py::arg("path"), py::arg("overrides") = std::vector<std::string>{});
    m.def("cutoff_norm", &cutoff_norm, py::arg("path"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("sign") = 1);

    m.def("chain_coefficients", [](double lambda, double rho) {
        const ChainCoefficients c = chain_coefficients(lambda, rho);
        return py::make_tuple(c.c1, c.c2);
    }, py::arg("lambda_carleman"), py::arg("rho"));
    m.def("kappa_schedule", &kappa_schedule, py::arg("L"), py::arg("c1"), py::arg("c2"), py::arg("beta") = 1.0);
    m.def("schedule_violation", &schedule_violation, py::arg("kappa"), py::arg("c1"), py::arg("c2"),
          py::arg("beta") = 1.0);
    m.def("path_gamma", [](std::size_t n, double rho, double lambda, double beta) {
        const BallCoverGraph g = BallCoverGraph::path(n, rho, lambda);
        const ChainCoefficients c = chain_coefficients(lambda, rho);
        return gamma_aggregate(g, c.c1, c.c2, beta).gamma;
    }, py::arg("n"), py::arg("rho") = 0.1, py::arg("lambda_carleman") = 1.0, py::arg("beta") = 1.0);

    py::class_<Tridiag>(m, "Tridiag")
        .def(py::init(&make_tridiag), py::arg("sub"), py::arg("diag"), py::arg("sup"))
        .def("__len__", &Tridiag::size);
    m.def("sigma_min", [](const Tridiag& A, double tol, std::uint64_t seed) {
        SigmaOptions o;
        o.tol = tol;
        o.seed = seed;
        return sigma_min_tridiag(A, o).sigma;
    }, py::arg("A"), py::arg("tol") = 1e-13, py::arg("seed") = 1);
    m.def("dense_sigma_min", &dense_sigma_min, py::arg("A"));

    m.def("run_command", [](const std::string& name, const std::string& config, const std::vector<std::string>& overrides,
                            std::optional<std::uint64_t> seed, unsigned workers, const std::string& out_dir,
                            bool oracle, bool report_only, bool find_tau0) {
        CliOptions o;
        o.config_path = config;
        o.overrides = overrides;
        o.seed = seed;
        o.workers = workers;
        o.out_dir = out_dir;
        o.oracle = oracle;
        o.report_only = report_only;
        o.find_tau0 = find_tau0;
        CommandResult res;
        {
            py::gil_scoped_release nogil;
            res = run_command(name, o);
        }
        return py::make_tuple(res.exit_code, res.summary_line, res.run_dir);
    }, py::arg("name"), py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
       py::arg("seed") = py::none(), py::arg("workers") = 1, py::arg("out_dir") = "", py::arg("oracle") = false,
       py::arg("report_only") = false, py::arg("find_tau0") = false,
       "Run a subcommand; returns (exit_code, summary_line, run_dir).");
}
