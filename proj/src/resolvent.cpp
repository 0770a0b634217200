#include "warpres/resolvent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "warpres/parallel.hpp"
#include "warpres/rng.hpp"

namespace warpres {

RadialGrid make_radial_grid(double r_lo, double r_hi, double dr_target) {
    if (!(r_hi > r_lo) || !(dr_target > 0.0)) throw std::invalid_argument("radial grid: need r_hi > r_lo and dr > 0");
    const double cells = std::ceil((r_hi - r_lo) / dr_target);
    if (cells > 1e9) throw std::invalid_argument("radial grid: too many points");
    const std::size_t n_cells = std::max<std::size_t>(2, static_cast<std::size_t>(cells));
    RadialGrid g;
    g.r_lo = r_lo;
    g.r_hi = r_hi;
    g.dr = (r_hi - r_lo) / static_cast<double>(n_cells);
    g.r.resize(n_cells - 1);
    for (std::size_t i = 0; i < g.r.size(); ++i) g.r[i] = r_lo + g.dr * static_cast<double>(i + 1);
    return g;
}

double grid_spacing(double h, double E, double v_max, double ppw) {
    if (!(h > 0.0) || !(ppw > 0.0)) throw std::invalid_argument("grid spacing: h and ppw must be positive");
    const double k2 = std::max(E, 0.0) + std::abs(v_max);
    if (!(k2 > 0.0)) throw std::invalid_argument("grid spacing: E + |V|max must be positive");
    return 2.0 * M_PI * h / (ppw * std::sqrt(k2));
}

cplx transparent_root(double w_minus_E, double eps, int sign, double dr, double h) {
    const double c = h * h / (dr * dr);
    const cplx beta = 1.0 + cplx(w_minus_E, sign * eps) / (2.0 * c);
    const cplx disc = std::sqrt(beta * beta - 1.0);
    const cplx r1 = beta + disc, r2 = beta - disc;
    const double a1 = std::abs(r1), a2 = std::abs(r2);
    if (std::abs(a1 - a2) > 1e-12 * std::max(a1, a2)) return a1 < a2 ? r1 : r2;
    // Both on the unit circle up to rounding: take the outgoing branch.
    const double want = -static_cast<double>(sign);
    return (r1.imag() * want >= 0.0) ? r1 : r2;
}

Tridiag ModeOperator::assemble(bool weighted) const {
    Tridiag A;
    const std::size_t n = diag.size();
    A.diag = diag;
    A.diag[n - 1] += far_closure;
    A.sub.resize(n - 1);
    A.sup.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) A.sub[i] = A.sup[i] = offdiag[i];
    if (weighted) {
        for (std::size_t i = 0; i < n; ++i) A.diag[i] /= weight[i] * weight[i];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double w = weight[i] * weight[i + 1];
            A.sub[i] /= w;
            A.sup[i] /= w;
        }
    }
    return A;
}

ModeOperator build_mode_operator(const ManifoldProfile& profile, const PotentialSpec& potential,
                                 const CarlemanParams& params, std::size_t mode, const RadialGrid& grid, int sign,
                                 FarBoundary far, double weight_s, double weight_anchor) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("mode operator: sign must be +1 or -1");
    if (grid.r.size() < 2) throw std::invalid_argument("mode operator: grid too small");
    ModeOperator op;
    op.grid = grid.r;
    op.h = params.h;
    op.E = params.E;
    op.epsilon_shift = params.epsilon_shift;
    op.lambda = profile.lambda(mode);
    op.dr = grid.dr;
    op.sign = sign;
    op.mode = mode;
    const double h2 = params.h * params.h;
    const double c = h2 / (grid.dr * grid.dr);
    const double anchor = weight_anchor > 0.0 ? weight_anchor : profile.r0 + 1.0;
    const std::size_t n = grid.r.size();
    op.diag.resize(n);
    op.offdiag.assign(n - 1, cplx(-c, 0.0));
    op.weight.resize(n);
    double last_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = grid.r[i];
        const WarpLog wl = warp_log_eval(profile.warp, r);
        const double centrifugal = op.lambda > 0.0 ? h2 * op.lambda * std::exp(-2.0 * wl.log_f) : 0.0;
        const double w = centrifugal + h2 * q0_eval(profile, r) + potential(r);
        op.diag[i] = cplx(2.0 * c + w - params.E, sign * params.epsilon_shift);
        op.weight[i] = std::min(1.0, std::pow(anchor / r, weight_s));
        last_w = w;
    }
    if (far == FarBoundary::Transparent)
        op.far_closure = -c * transparent_root(last_w - params.E, params.epsilon_shift, sign, grid.dr, params.h);
    const double wavelength = 2.0 * M_PI * params.h / std::sqrt(std::max(params.E, 0.0) + potential.max_abs());
    op.coarse_warning = wavelength / grid.dr < 8.0;
    return op;
}

SigmaResult sigma_min(const ModeOperator& op, bool weighted, const SigmaOptions& opts) {
    return sigma_min_tridiag(op.assemble(weighted), opts);
}

std::size_t count_modes(const ManifoldProfile& profile, const CarlemanParams& params, double r_cut, double margin,
                        std::size_t cap) {
    const double inv_f2 = std::exp(-2.0 * warp_log_eval(profile.warp, r_cut).log_f);
    const double limit = params.E + margin;
    const std::size_t avail = std::min(cap, profile.spectrum_size());
    std::size_t j = 0;
    while (j < avail && params.h * params.h * profile.lambda(j) * inv_f2 <= limit) ++j;
    return std::max<std::size_t>(j, 1);
}

namespace {

double inner_radius(const ManifoldProfile& profile, const ResolventOptions& opts) {
    return opts.r_inner > 0.0 ? opts.r_inner : profile.r0;
}

double weight_exponent(const CarlemanParams& params, const ResolventOptions& opts) {
    if (!opts.derived_s) return opts.weight_s;
    if (!(params.h < std::exp(-1.0))) throw std::invalid_argument("derived weight exponent needs h < 1/e");
    return 0.5 * (1.0 + 1.0 / std::log(1.0 / params.h));
}

RadialGrid resolvent_grid(const ManifoldProfile& profile, const PotentialSpec& potential,
                          const CarlemanParams& params, const ResolventOptions& opts, double r_max, double ppw) {
    const double dr = opts.dr_override > 0.0 ? opts.dr_override
                                             : grid_spacing(params.h, params.E, potential.max_abs(), ppw);
    const double r_lo = inner_radius(profile, opts);
    const double n_est = (r_max - r_lo) / dr;
    if (n_est > static_cast<double>(opts.max_points))
        throw std::runtime_error("resolvent grid exceeds max_points (" + std::to_string(static_cast<long long>(n_est)) +
                                 " nodes); raise resolvent.max_points or h");
    return make_radial_grid(r_lo, r_max, dr);
}

ModeSigma mode_sigma(const ManifoldProfile& profile, const PotentialSpec& potential, const CarlemanParams& params,
                     const ResolventOptions& opts, const RadialGrid& grid, std::size_t mode, int sign, double s,
                     bool* coarse) {
    const ModeOperator op = build_mode_operator(profile, potential, params, mode, grid, sign, opts.far, s,
                                                inner_radius(profile, opts) + 1.0);
    SigmaOptions so = opts.sigma;
    so.seed = mix_seed(opts.seed, mode, static_cast<std::uint64_t>(sign + 1));
    const SigmaResult sr = sigma_min(op, true, so);
    if (coarse) *coarse = op.coarse_warning;
    return ModeSigma{mode, op.lambda, sr.sigma, sr.converged};
}

void add_flag(std::vector<std::string>& flags, const std::string& f) {
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
}

}  // namespace

CutoffNorm cutoff_resolvent_norm(const ManifoldProfile& profile, const PotentialSpec& potential,
                                 const CarlemanParams& params, const ResolventOptions& opts, int sign) {
    profile.validate();
    potential.validate();
    const double s = weight_exponent(params, opts);
    const RadialGrid grid = resolvent_grid(profile, potential, params, opts, opts.r_max, opts.ppw);
    const double r_cut = opts.cutoff_radius > 0.0 ? opts.cutoff_radius : inner_radius(profile, opts);
    const std::size_t modes = count_modes(profile, params, r_cut, opts.mode_margin, opts.max_modes);

    CutoffNorm out;
    out.n_points = grid.r.size();
    out.modes_used = modes;
    out.per_mode.resize(modes);
    std::vector<char> coarse(modes, 0);
    parallel_for(modes, opts.workers, [&](std::size_t j) {
        bool c = false;
        out.per_mode[j] = mode_sigma(profile, potential, params, opts, grid, j, sign, s, &c);
        coarse[j] = c ? 1 : 0;
    });

    double smin = std::numeric_limits<double>::infinity();
    for (const auto& m : out.per_mode) {
        if (m.sigma < smin) {
            smin = m.sigma;
            out.dominant_mode = m.mode;
        }
        if (!m.converged) add_flag(out.flags, "sigma_not_converged");
    }
    if (std::any_of(coarse.begin(), coarse.end(), [](char c) { return c != 0; })) add_flag(out.flags, "coarse_grid");
    out.norm = 1.0 / smin;

    if (opts.check_excluded_mode && modes < profile.spectrum_size() && modes < opts.max_modes) {
        const ModeSigma ex = mode_sigma(profile, potential, params, opts, grid, modes, sign, s, nullptr);
        out.excluded_mode_norm = 1.0 / ex.sigma;
        if (out.excluded_mode_norm >= out.norm) add_flag(out.flags, "excluded_mode_dominates");
    }

    if (opts.check_rmax) {
        const double r_lo = inner_radius(profile, opts);
        const RadialGrid big = resolvent_grid(profile, potential, params, opts, r_lo + 2.0 * (opts.r_max - r_lo),
                                              opts.ppw);
        const ModeSigma m2 = mode_sigma(profile, potential, params, opts, big, out.dominant_mode, sign, s, nullptr);
        out.rmax_change = std::abs(1.0 / m2.sigma - out.norm) / out.norm;
        if (out.rmax_change > 0.05) add_flag(out.flags, "rmax_sensitive");
    }
    return out;
}

double grid_convergence_change(const ManifoldProfile& profile, const PotentialSpec& potential,
                               const CarlemanParams& params, const ResolventOptions& opts, std::size_t mode,
                               double factor, int sign) {
    const double s = weight_exponent(params, opts);
    const RadialGrid g1 = resolvent_grid(profile, potential, params, opts, opts.r_max, opts.ppw);
    ResolventOptions fine = opts;
    if (fine.dr_override > 0.0) fine.dr_override /= factor;
    const RadialGrid g2 = resolvent_grid(profile, potential, params, fine, opts.r_max, opts.ppw * factor);
    const double n1 = 1.0 / mode_sigma(profile, potential, params, opts, g1, mode, sign, s, nullptr).sigma;
    const double n2 = 1.0 / mode_sigma(profile, potential, params, opts, g2, mode, sign, s, nullptr).sigma;
    return std::abs(n2 - n1) / n1;
}

namespace {

struct WellProblem {
    std::vector<double> r;  // well nodes (Dirichlet truncation)
    std::vector<double> w;  // h-independent part of the potential
    std::vector<double> w_h2;  // coefficient of h^2
    double dr;

    void matrices(double h, std::vector<double>& d, std::vector<double>& e) const {
        const double c = h * h / (dr * dr);
        d.resize(r.size());
        e.assign(r.size() - 1, -c);
        for (std::size_t i = 0; i < r.size(); ++i) d[i] = 2.0 * c + w[i] + h * h * w_h2[i];
    }
    double level(double h, std::size_t n) const {
        std::vector<double> d, e;
        matrices(h, d, e);
        return sturm_eigenvalue(d, e, n);
    }
};

}  // namespace

TrappedLevel find_trapped_level(const Scenario& sc, double h_nominal, int sign) {
    const ResolventOptions& ro = sc.resolvent;
    CarlemanParams p0 = sc.params;
    p0.h = h_nominal;
    const double E = sc.params.E;
    const double trap = sc.trap_radius > 0.0 ? sc.trap_radius : sc.potential.support_end;
    if (!(trap > 0.0)) throw std::invalid_argument("trapped level: no trap radius and no compact support");
    const RadialGrid grid = resolvent_grid(sc.profile, sc.potential, p0, ro, ro.r_max, ro.ppw);

    WellProblem well;
    well.dr = grid.dr;
    const double lambda0 = sc.profile.lambda(0);
    for (double r : grid.r) {
        if (r > trap) break;
        well.r.push_back(r);
        const double inv_f2 = std::exp(-2.0 * warp_log_eval(sc.profile.warp, r).log_f);
        well.w.push_back(sc.potential(r));
        well.w_h2.push_back(lambda0 * inv_f2 + q0_eval(sc.profile, r));
    }
    if (well.r.size() < 3) throw std::runtime_error("trapped level: well has fewer than 3 nodes");

    std::vector<double> d, e;
    well.matrices(h_nominal, d, e);
    const std::size_t below = sturm_count(d, e, E);
    if (below == 0) throw std::runtime_error("trapped level: no well eigenvalue below E");
    const std::size_t n = below - 1;

    double h_lo = h_nominal, h_hi = h_nominal;
    for (int k = 0; well.level(h_hi, n) < E; ++k) {
        if (k > 400) throw std::runtime_error("trapped level: could not bracket h");
        h_lo = h_hi;
        h_hi *= 1.02;
    }
    for (int it = 0; it < 200 && h_hi - h_lo > 1e-15 * h_hi; ++it) {
        const double mid = 0.5 * (h_lo + h_hi);
        if (well.level(mid, n) < E)
            h_lo = mid;
        else
            h_hi = mid;
    }
    const double h = 0.5 * (h_lo + h_hi);
    const double ln = well.level(h, n);
    double spacing = std::numeric_limits<double>::infinity();
    if (n > 0) spacing = ln - well.level(h, n - 1);
    if (n + 1 < well.r.size()) spacing = std::min(spacing, well.level(h, n + 1) - ln);
    const double width = 0.25 * spacing;

    CarlemanParams p = sc.params;
    p.h = h;
    const double s = weight_exponent(p, ro);
    auto objective = [&](double En) {
        CarlemanParams q = p;
        q.E = En;
        const ModeOperator op = build_mode_operator(sc.profile, sc.potential, q, 0, grid, sign, ro.far, s,
                                                    inner_radius(sc.profile, ro) + 1.0);
        SigmaOptions so = ro.sigma;
        so.seed = mix_seed(ro.seed, 0, static_cast<std::uint64_t>(sign + 1));
        return std::log(sigma_min(op, true, so).sigma);
    };
    // Golden section on log sigma_min; the peak is far narrower than Brent's default tolerance.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = E - width, b = E + width;
    double c = b - g * (b - a), dd = a + g * (b - a);
    double fc = objective(c), fd = objective(dd);
    for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(E)); ++it) {
        if (fc < fd) {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = objective(dd);
        }
    }
    TrappedLevel out;
    out.h = h;
    out.level = n;
    out.spacing = spacing;
    if (fc < fd) {
        out.E = c;
        out.log_norm_mode0 = -fc;
    } else {
        out.E = dd;
        out.log_norm_mode0 = -fd;
    }
    return out;
}

SweepResult h_sweep(const Scenario& sc, const std::vector<double>& h_list, int sign) {
    SweepResult res;
    res.sign = sign;
    res.entries.reserve(h_list.size());
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepEntry e;
        e.h_nominal = h_list[i];
        CarlemanParams p = sc.params;
        ResolventOptions ro = sc.resolvent;
        ro.seed = mix_seed(sc.seed, i);
        if (sc.energy == EnergyMode::Trapped) {
            const TrappedLevel lv = find_trapped_level(sc, h_list[i], sign);
            CarlemanParams p0 = sc.params;
            p0.h = h_list[i];
            ro.dr_override = grid_spacing(p0.h, p0.E, sc.potential.max_abs(), ro.ppw);
            p.h = lv.h;
            p.E = lv.E;
        } else {
            p.h = h_list[i];
        }
        const CutoffNorm cn = cutoff_resolvent_norm(sc.profile, sc.potential, p, ro, sign);
        e.h = p.h;
        e.E = p.E;
        e.norm = cn.norm;
        e.dominant_mode = cn.dominant_mode;
        e.n_points = cn.n_points;
        e.modes_used = cn.modes_used;
        e.rmax_change = cn.rmax_change;
        e.excluded_mode_norm = cn.excluded_mode_norm;
        e.per_mode = cn.per_mode;
        e.flags = cn.flags;
        e.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        res.entries.push_back(std::move(e));
    }
    return res;
}

std::vector<double> SweepResult::h() const {
    std::vector<double> v;
    for (const auto& e : entries) v.push_back(e.h);
    return v;
}

std::vector<double> SweepResult::log_norm() const {
    std::vector<double> v;
    for (const auto& e : entries) v.push_back(std::log(e.norm));
    return v;
}

namespace {

double envelope(double h, double p, double q) {
    return std::pow(h, -p) * std::pow(std::log(1.0 / h), q);
}

}  // namespace

BoundCheck bound_check(const SweepResult& sweep, double p, double q) {
    BoundCheck bc;
    bc.p = p;
    bc.q = q;
    // Work in order of decreasing h so "final third" means the smallest h.
    std::vector<std::size_t> idx(sweep.entries.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return sweep.entries[a].h > sweep.entries[b].h; });
    bc.per_h.resize(idx.size());
    bool finite = true;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto& e = sweep.entries[i];
        bc.per_h[i] = std::log(e.norm) / envelope(e.h, p, q);
        finite = finite && std::isfinite(bc.per_h[i]);
        bc.implied_C = std::max(bc.implied_C, bc.per_h[i]);
    }
    const std::size_t n = idx.size();
    const std::size_t tail = std::max<std::size_t>(2, (n + 2) / 3);
    bool nonincreasing = true;  // a single point has nothing to compare against
    for (std::size_t k = n >= tail ? n - tail + 1 : 1; k < n; ++k) {
        const double prev = bc.per_h[idx[k - 1]], cur = bc.per_h[idx[k]];
        if (cur > prev * (1.0 + 1e-12)) nonincreasing = false;
    }
    bc.consistent = finite && nonincreasing;
    return bc;
}

BoundCheck bound_check(const SweepResult& sweep, const ManifoldProfile& profile, const PotentialSpec& potential) {
    const BoundExponent be = predicted_bound_exponent(profile, potential);
    return bound_check(sweep, be.p, be.log_power);
}

ExponentFit fit_sweep(const SweepResult& sweep, const FitModel& model) {
    std::vector<double> h = sweep.h(), y = sweep.log_norm();
    for (double v : y)
        if (!(v > 0.0)) throw std::invalid_argument("fit_sweep: log norm must be positive to fit a power law");
    return fit_exponent(h, y, model);
}

double dominating_constant(const SweepResult& sweep, double p, double q) {
    auto ok = [&](double C) {
        for (const auto& e : sweep.entries)
            if (std::log(e.norm) > std::log(C) + C * envelope(e.h, p, q)) return false;
        return true;
    };
    double lo = 1e-12, hi = 1e12;
    if (ok(lo)) return lo;
    if (!ok(hi)) return std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return hi;
}

}  // namespace warpres
