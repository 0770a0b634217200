#include "warpres/phaseweight.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace warpres {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sign(x) exp(log|x| + shift) without inf*0.
double scaled(double x, double log_shift) {
    if (x == 0.0) return 0.0;
    return std::copysign(std::exp(std::log(std::abs(x)) + log_shift), x);
}

double safe_exp(double x) { return x > 709.0 ? kInf : std::exp(x); }

}  // namespace

void CarlemanParams::validate() const {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("h must lie in (0,1)");
    if (!(E > 0.0)) throw std::invalid_argument("E must be positive");
    if (!(epsilon_shift > 0.0 && epsilon_shift <= 1.0))
        throw std::invalid_argument("epsilon_shift must lie in (0,1]");
    if (!(delta > 1.0)) throw std::invalid_argument("delta must exceed 1");
    if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    if (!(b >= 0.0)) throw std::invalid_argument("b must be nonnegative");
    if (!(ineq_const_C >= 0.0)) throw std::invalid_argument("ineq_const_C must be nonnegative");
}

DerivedScales derive_scales(const CarlemanParams& params, const WarpFamily& warp,
                            const PotentialSpec& potential) {
    params.validate();
    if (params.compact_support != potential.compact_support())
        throw std::invalid_argument("params.compact_support disagrees with the potential kind");
    if (!(params.h < std::exp(-1.0))) {
        std::ostringstream os;
        os << "derive_scales: h = " << params.h << " >= 1/e, log log(1/h) is not positive";
        throw std::invalid_argument(os.str());
    }
    PotentialSpec pot = potential;
    pot.delta = params.delta;
    DerivedScales s;
    const double L = std::log(1.0 / params.h);
    s.epsilon_log = 1.0 / L;
    s.s = 0.5 * (1.0 + s.epsilon_log);
    s.lambda_loglog = std::log(L);
    s.m0 = m0_compute(warp, pot);
    if (params.compact_support)
        s.m = s.m0 + s.epsilon_log * params.t;
    else
        s.m = s.m0 + s.epsilon_log * (s.lambda_loglog + s.m0 + params.t) / (params.delta - 1.0);
    s.log_a = s.m * L;
    s.a = safe_exp(s.log_a);
    s.tau = params.tau0 * std::pow(params.h, -1.0 / 3.0);
    return s;
}

WeightPhase::WeightPhase(const CarlemanParams& params, const DerivedScales& scales,
                         const ManifoldProfile& profile, WeightOptions opts)
    : params_(params), scales_(scales), profile_(profile), opts_(opts) {
    profile_.validate();
    a_ = scales.a;
    if (!std::isfinite(a_)) throw std::invalid_argument("WeightPhase: a overflows");
    if (!(a_ > profile_.r1)) throw std::invalid_argument("WeightPhase: a must exceed r1");
    log_fa_ = warp_log_eval(profile_.warp, a_).log_f;
    inv_fa_ = std::exp(-log_fa_);
    phi_a_ = 0.0;
    phi_a_ = phi(a_);
}

double WeightPhase::integral_inv_f(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    const WarpFamily& w = profile_.warp;
    if (w.kind == WarpKind::Polynomial) {
        const double k = w.param;
        if (k == 1.0) return std::log(hi / lo);
        const double e = 1.0 - k;
        return std::pow(lo, e) * std::expm1(e * std::log(hi / lo)) / e;
    }
    // Pieces one e-folding of e^{-t^alpha} long, stopped once the tail is negligible.
    const double alpha = w.param;
    auto f = [alpha](double t) { return std::exp(-std::pow(t, alpha)); };
    double sum = 0.0, x = lo;
    while (x < hi) {
        const double step = std::pow(x, 1.0 - alpha) / alpha;
        const double y = std::min(hi, x + step);
        double err = 0.0;
        sum += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x, y, 10, 1e-13, &err);
        if (f(y) * std::pow(y, 1.0 - alpha) / alpha < 1e-17 * sum) break;
        x = y;
    }
    return sum;
}

double WeightPhase::phi(double r) const {
    const double r1 = profile_.r1;
    if (r <= r1) return 0.0;
    if (r >= a_ && phi_a_ > 0.0) return phi_a_;
    const double rr = std::min(r, a_);
    return scales_.tau * (integral_inv_f(r1, rr) - (rr - r1) * inv_fa_);
}

double WeightPhase::phi_prime(double r) const {
    if (r >= a_) return 0.0;
    const double lf = warp_log_eval(profile_.warp, r).log_f;
    return scales_.tau * (std::exp(-lf) - inv_fa_);
}

double WeightPhase::phi_second(double r) const {
    if (r >= a_) return 0.0;
    const WarpLog w = warp_log_eval(profile_.warp, r);
    return -scales_.tau * w.g1 * std::exp(-w.log_f);
}

std::vector<double> WeightPhase::phi_on_grid(const std::vector<double>& r) const {
    std::vector<double> out(r.size(), 0.0);
    const double r1 = profile_.r1;
    double acc = 0.0;  // integral of 1/f from r1 to the previous point
    double prev = r1;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i > 0 && r[i] < r[i - 1]) throw std::invalid_argument("phi_on_grid: grid not increasing");
        const double x = std::clamp(r[i], r1, a_);
        if (x > prev) {
            acc += integral_inv_f(prev, x);
            prev = x;
        }
        out[i] = r[i] >= a_ ? phi_a_ : scales_.tau * (acc - (x - r1) * inv_fa_);
    }
    return out;
}

PointValues WeightPhase::eval(double r, Branch branch) const {
    const CarlemanParams& P = params_;
    const DerivedScales& S = scales_;
    PointValues v;
    v.r = r;
    v.branch = branch;
    const WarpLog w = warp_log_eval(profile_.warp, r);
    v.log_f = w.log_f;
    v.g1 = w.g1;
    const double lr = std::log(r);
    const double bshift = mu_shift();
    const double log_h = std::log(P.h);
    if (branch == Branch::Left) {
        const double u = bshift * std::exp(-w.log_f);  // b/f
        if (!(u < 1.0)) throw std::invalid_argument("WeightPhase: f(r) <= b on the working range");
        const double l1mu = std::log1p(-u);
        v.log_mu = 2.0 * (w.log_f + l1mu);
        v.log_mu_prime = std::log(2.0 * w.g1) + 2.0 * w.log_f + l1mu;
        v.log_rho = l1mu - std::log(2.0 * w.g1);
        v.phi_prime = S.tau * (std::exp(-w.log_f) - inv_fa_);
        v.phi_second = -S.tau * w.g1 * std::exp(-w.log_f);
        const double rho = std::exp(v.log_rho);
        v.A_norm = v.phi_prime * v.phi_prime + 2.0 * rho * v.phi_prime * v.phi_second;
    } else {
        const double ua = bshift * inv_fa_;
        const double la = 2.0 * (log_fa_ + std::log1p(-ua));
        const double extra = std::exp(-S.epsilon_log * S.log_a) - std::exp(-S.epsilon_log * lr);
        v.log_mu = la + std::log1p(extra * std::exp(-la));
        v.log_mu_prime = std::log(S.epsilon_log) - 2.0 * S.s * lr;
        v.log_rho = v.log_mu - v.log_mu_prime;
        v.phi_prime = 0.0;
        v.phi_second = 0.0;
        v.A_norm = 0.0;
    }
    v.phi = r >= a_ ? phi_a_ : phi(r);
    // rho * X, X = h^{-1} r^{-delta} f^{-2} [general] + h r^{-1} f^{-2} + |phi''|
    double rhoX = std::exp(v.log_rho + log_h - lr - 2.0 * w.log_f);
    if (!P.compact_support) rhoX += safe_exp(v.log_rho - log_h - P.delta * lr - 2.0 * w.log_f);
    if (v.phi_second != 0.0) rhoX += std::exp(v.log_rho + std::log(std::abs(v.phi_second)));
    const double denom = 1.0 + (v.phi_prime > 0.0 ? std::exp(std::log(v.phi_prime) + v.log_rho - log_h) : 0.0);
    v.B_norm = rhoX * rhoX / denom;
    v.q0 = q0_closed_form(profile_, r);
    v.muq0p_norm = v.q0 + scaled(q0_prime(profile_, r), v.log_rho);
    const double h2 = P.h * P.h;
    v.margin = v.A_norm - P.ineq_const_C * (P.ineq_const_C == 0.0 ? 0.0 : v.B_norm) - h2 * v.muq0p_norm +
               0.5 * P.E;
    if (std::isnan(v.margin)) v.margin = -kInf;
    return v;
}

std::vector<double> profile_grid(double r1, double a, const GridSpec& spec) {
    if (!(a > r1)) throw std::invalid_argument("profile grid: a must exceed r1");
    const double rmax = spec.r_max_factor * a;
    if (!(rmax > a)) throw std::invalid_argument("profile grid: R_max must exceed a");
    std::vector<double> g = log_grid(r1, rmax, spec.base_points);
    const double lo = std::max(r1, a * (1.0 - spec.refine_halfwidth));
    const double hi = a * (1.0 + spec.refine_halfwidth);
    for (std::size_t i = 0; i < spec.refine_points; ++i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(spec.refine_points);
        g.push_back(x);
    }
    std::sort(g.begin(), g.end());
    std::vector<double> out;
    out.reserve(g.size());
    for (double x : g) {
        if (x == a) continue;
        if (!out.empty() && x <= out.back() * (1.0 + 1e-15)) continue;
        out.push_back(x);
    }
    return out;
}

WeightPhaseProfile build_profile(const CarlemanParams& params, const DerivedScales& scales,
                                 const ManifoldProfile& profile, const GridSpec& grid_spec,
                                 WeightOptions opts) {
    WeightPhase wp(params, scales, profile, opts);
    WeightPhaseProfile P;
    P.a = wp.a();
    P.r1 = profile.r1;
    P.log_fa = wp.log_fa();
    P.grid = profile_grid(profile.r1, wp.a(), grid_spec);
    for (std::size_t i = 1; i < P.grid.size(); ++i)
        if (!(P.grid[i] > P.grid[i - 1])) throw std::invalid_argument("build_profile: non-monotone grid");
    if (!(P.grid.front() < P.a && P.grid.back() > P.a))
        throw std::invalid_argument("build_profile: grid does not cover a");
    const std::size_t n = P.grid.size();
    const std::vector<double> phi = wp.phi_on_grid(P.grid);
    auto resize = [n](std::vector<double>& v) { v.assign(n, 0.0); };
    for (auto* v : {&P.mu, &P.mu_prime, &P.phi, &P.phi_prime, &P.phi_second, &P.A, &P.B, &P.q0,
                    &P.mu_q0_prime, &P.log_mu, &P.log_mu_prime, &P.A_norm, &P.B_norm, &P.muq0p_norm,
                    &P.margin})
        resize(*v);
    for (std::size_t i = 0; i < n; ++i) {
        PointValues v = wp.eval(P.grid[i]);
        v.phi = phi[i];
        const double mup = safe_exp(v.log_mu_prime);
        P.log_mu[i] = v.log_mu;
        P.log_mu_prime[i] = v.log_mu_prime;
        P.mu[i] = safe_exp(v.log_mu);
        P.mu_prime[i] = mup;
        P.phi[i] = v.phi;
        P.phi_prime[i] = v.phi_prime;
        P.phi_second[i] = v.phi_second;
        P.A_norm[i] = v.A_norm;
        P.B_norm[i] = v.B_norm;
        P.muq0p_norm[i] = v.muq0p_norm;
        P.A[i] = scaled(v.A_norm, v.log_mu_prime);
        P.B[i] = scaled(v.B_norm, v.log_mu_prime);
        P.mu_q0_prime[i] = scaled(v.muq0p_norm, v.log_mu_prime);
        P.q0[i] = v.q0;
        P.margin[i] = v.margin;
    }
    P.at_a_left = wp.eval(P.a, Branch::Left);
    P.at_a_right = wp.eval(P.a, Branch::Right);
    return P;
}

RatioBounds check_ratio_bounds(const WeightPhaseProfile& prof, const DerivedScales& scales) {
    RatioBounds rb;
    double l32 = -kInf, l33 = -kInf;
    const double le = std::log(scales.epsilon_log);
    auto visit = [&](double r, double log_mu, double log_mup) {
        const double base = log_mu - log_mup + le - 2.0 * prof.log_fa - 2.0 * scales.s * std::log(r);
        l32 = std::max(l32, base);
        l33 = std::max(l33, base + log_mu - 2.0 * prof.log_fa);
    };
    for (std::size_t i = 0; i < prof.grid.size(); ++i) visit(prof.grid[i], prof.log_mu[i], prof.log_mu_prime[i]);
    visit(prof.a, prof.at_a_left.log_mu, prof.at_a_left.log_mu_prime);
    visit(prof.a, prof.at_a_right.log_mu, prof.at_a_right.log_mu_prime);
    rb.c32 = safe_exp(l32);
    rb.c33 = safe_exp(l33);
    return rb;
}

double phase_max(const WeightPhaseProfile& prof) { return prof.at_a_left.phi; }

PhaseScaling phase_max_scaling(const CarlemanParams& params_template, const ManifoldProfile& profile,
                               const PotentialSpec& potential, const std::vector<double>& h_list,
                               const FitModel& model) {
    if (h_list.size() < 4) throw std::invalid_argument("phase_max_scaling: need at least 4 h values");
    PhaseScaling out;
    for (double h : h_list) {
        CarlemanParams p = params_template;
        p.h = h;
        const DerivedScales s = derive_scales(p, profile.warp, potential);
        WeightPhase wp(p, s, profile);
        out.h.push_back(h);
        out.phase_max_over_h.push_back(wp.phase_max() / h);
    }
    out.fit = fit_exponent(out.h, out.phase_max_over_h, model, 4);
    return out;
}

KeyInequalityReport check_key_inequality(const WeightPhaseProfile& prof, const CarlemanParams& params,
                                         const DerivedScales& scales, double E) {
    (void)scales;
    KeyInequalityReport rep;
    const double dE = 0.5 * (E - params.E);  // margins were built with params.E
    rep.margin.resize(prof.grid.size());
    rep.worst_margin = kInf;
    rep.worst_margin_left = kInf;
    rep.worst_margin_right = kInf;
    auto consider = [&](double r, double m, Branch br) {
        if (br == Branch::Left)
            rep.worst_margin_left = std::min(rep.worst_margin_left, m);
        else
            rep.worst_margin_right = std::min(rep.worst_margin_right, m);
        if (m < rep.worst_margin) {
            rep.worst_margin = m;
            rep.worst_r = r;
            rep.worst_branch = br;
        }
    };
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        rep.margin[i] = prof.margin[i] + dE;
        consider(prof.grid[i], rep.margin[i], prof.grid[i] < prof.a ? Branch::Left : Branch::Right);
    }
    rep.margin_left_at_a = prof.at_a_left.margin + dE;
    rep.margin_right_at_a = prof.at_a_right.margin + dE;
    consider(prof.a, rep.margin_left_at_a, Branch::Left);
    consider(prof.a, rep.margin_right_at_a, Branch::Right);
    rep.holds = rep.worst_margin >= 0.0;
    return rep;
}

double muq0_surrogate(const WeightPhaseProfile& prof, double h) {
    double worst = -kInf;
    for (double v : prof.muq0p_norm) worst = std::max(worst, h * h * v);
    worst = std::max(worst, h * h * prof.at_a_left.muq0p_norm);
    worst = std::max(worst, h * h * prof.at_a_right.muq0p_norm);
    return worst;
}

bool key_inequality_all(const CarlemanParams& params_template, const ManifoldProfile& profile,
                        const PotentialSpec& potential, const std::vector<double>& h_list, double tau0,
                        const GridSpec& grid, std::vector<Tau0Failure>* per_h) {
    bool ok = true;
    if (per_h) per_h->clear();
    for (double h : h_list) {
        CarlemanParams p = params_template;
        p.h = h;
        p.tau0 = tau0;
        const DerivedScales s = derive_scales(p, profile.warp, potential);
        const WeightPhaseProfile prof = build_profile(p, s, profile, grid);
        const KeyInequalityReport rep = check_key_inequality(prof, p, s, p.E);
        if (per_h) per_h->push_back({h, rep.worst_r, rep.worst_margin});
        if (!rep.holds) {
            ok = false;
            if (!per_h) break;
        }
    }
    return ok;
}

Tau0Result find_admissible_tau0(const CarlemanParams& params_template, const ManifoldProfile& profile,
                                const PotentialSpec& potential, const std::vector<double>& h_list,
                                double tau0_lo, double tau0_hi, const GridSpec& grid) {
    if (!(tau0_lo > 0.0 && tau0_hi > tau0_lo)) throw std::invalid_argument("find_admissible_tau0: bad range");
    if (h_list.empty()) throw std::invalid_argument("find_admissible_tau0: empty h list");
    auto holds = [&](double t0) { return key_inequality_all(params_template, profile, potential, h_list, t0, grid); };
    const int scan = 32;
    const double llo = std::log(tau0_lo), lhi = std::log(tau0_hi);
    double fail = -1.0, pass = -1.0;
    for (int i = 0; i <= scan; ++i) {
        const double t0 = std::exp(llo + (lhi - llo) * i / scan);
        if (holds(t0)) {
            pass = t0;
            break;
        }
        fail = t0;
    }
    if (pass < 0.0) {
        std::vector<Tau0Failure> f;
        key_inequality_all(params_template, profile, potential, h_list, tau0_hi, grid, &f);
        std::ostringstream os;
        os << "no admissible tau0 in [" << tau0_lo << ", " << tau0_hi << "]; worst margins at tau0=" << tau0_hi
           << ":";
        for (const auto& x : f) os << " (h=" << x.h << ", r=" << x.worst_r << ", margin=" << x.worst_margin << ")";
        throw Tau0Error(os.str(), std::move(f));
    }
    if (fail > 0.0) {
        double lo = std::log(fail), hi = std::log(pass);
        for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (holds(std::exp(mid)))
                hi = mid;
            else
                lo = mid;
        }
        pass = std::exp(hi);
    }
    Tau0Result res;
    res.tau0_star = pass;
    key_inequality_all(params_template, profile, potential, h_list, pass, grid, &res.margins_at_star);
    res.holds_at_double = holds(2.0 * pass);
    return res;
}

}  // namespace warpres
