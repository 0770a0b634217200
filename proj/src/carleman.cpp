#include "warpres/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "warpres/parallel.hpp"
#include "warpres/rng.hpp"

namespace warpres {

double b_selection(double c_sharp, double bound_const) {
    if (!(c_sharp > 0.0) || !(bound_const > 0.0)) throw std::invalid_argument("b_selection: inputs must be positive");
    return 4.0 * bound_const / c_sharp;
}

namespace {

bool is_symmetric(const Eigen::MatrixXd& M, double tol = 1e-12) {
    if (M.rows() != M.cols()) return false;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double spectral_norm_sym(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

void MetricPerturbation::validate(double c_sharp, const std::vector<double>& r_samples) const {
    if (omega_inv.rows() == 0) throw std::invalid_argument("metric perturbation: empty omega");
    if (!is_symmetric(omega_inv)) throw std::invalid_argument("metric perturbation: omega_inv not symmetric");
    if (!(bound_const >= 0.0)) throw std::invalid_argument("metric perturbation: bound_const must be >= 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega_inv, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < c_sharp * (1.0 - 1e-12))
        throw std::invalid_argument("metric perturbation: omega_inv has an eigenvalue below c_sharp");
    for (double r : r_samples) {
        for (const Direction* d : {&residual_direction, &derivative_direction}) {
            if (!*d) continue;
            const Eigen::MatrixXd S = (*d)(r);
            if (S.rows() != omega_inv.rows() || !is_symmetric(S))
                throw std::invalid_argument("metric perturbation: residual direction not symmetric");
            if (spectral_norm_sym(S) > 1.0 + 1e-12)
                throw std::invalid_argument("metric perturbation: residual exceeds its bound");
        }
    }
}

MetricPerturbation MetricPerturbation::exact(const Eigen::MatrixXd& omega_inv, double bound_const) {
    MetricPerturbation p;
    p.omega_inv = omega_inv;
    p.bound_const = bound_const;
    return p;
}

MetricPerturbation MetricPerturbation::constant(const Eigen::MatrixXd& omega_inv, double bound_const,
                                                const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
    MetricPerturbation p = exact(omega_inv, bound_const);
    p.residual_direction = [s1](double) { return s1; };
    p.derivative_direction = [s2](double) { return s2; };
    return p;
}

Eigen::MatrixXd random_unit_symmetric(std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd M(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) M(i, j) = M(j, i) = rng.normal();
    const double n = spectral_norm_sym(M);
    return n > 0.0 ? Eigen::MatrixXd(M / n) : Eigen::MatrixXd::Identity(d, d);
}

Eigen::MatrixXd random_omega(std::size_t d, double c_sharp, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd G(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) G(i, j) = rng.normal();
    Eigen::MatrixXd S = G * G.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    S += (c_sharp - es.eigenvalues().minCoeff()) * Eigen::MatrixXd::Identity(d, d);
    return 0.5 * (S + S.transpose());
}

PhiCheckResult phi_matrix_check(const MetricPerturbation& pert, const WeightPhase& wp,
                                const std::vector<double>& r_samples, double tol) {
    const std::size_t d = pert.dim();
    if (d == 0 || !is_symmetric(pert.omega_inv)) throw std::invalid_argument("phi check: omega_inv not symmetric");
    const double b = wp.mu_shift();
    const double f1 = std::exp(warp_log_eval(wp.profile().warp, wp.r1()).log_f);
    if (b > 0.0 && f1 < 2.0 * b * (1.0 - 1e-12)) throw std::invalid_argument("phi check: f(r1) < 2b");
    const double C = pert.bound_const;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(d, d);

    PhiCheckResult res;
    res.max_eigenvalue = -std::numeric_limits<double>::infinity();
    auto visit = [&](double r, Branch br) {
        const PointValues pv = wp.eval(r, br);
        const Eigen::MatrixXd S1 = pert.residual_direction ? pert.residual_direction(r) : zero;
        const Eigen::MatrixXd S2 = pert.derivative_direction ? pert.derivative_direction(r) : zero;
        if (!is_symmetric(S1) || !is_symmetric(S2)) throw std::invalid_argument("phi check: non-symmetric residual");
        Eigen::MatrixXd Phi;
        if (br == Branch::Left) {
            const double one_u = 1.0 - b * std::exp(-pv.log_f);
            Phi = 2.0 * b * one_u * pert.omega_inv + C * (one_u * one_u * S2 + 2.0 * one_u * S1);
        } else {
            const double inv_rho = std::exp(-pv.log_rho);
            Phi = (inv_rho / pv.g1 - 2.0) * pert.omega_inv + C * std::exp(-pv.log_f) * S2 +
                  C * std::exp(-pv.log_rho - std::log(pv.g1) - pv.log_f) * S1;
        }
        const Eigen::MatrixXd Ps = 0.5 * (Phi + Phi.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ps, Eigen::EigenvaluesOnly);
        const double lam = es.eigenvalues().maxCoeff();
        if (br == Branch::Left)
            res.max_left = std::max(res.max_left, lam);
        else
            res.max_right = std::max(res.max_right, lam);
        if (lam > res.max_eigenvalue) {
            res.max_eigenvalue = lam;
            res.worst_r = r;
            res.worst_branch = br;
        }
        ++res.samples;
    };
    const double a = wp.a();
    for (double r : r_samples) {
        if (r < wp.r1() || r == a) continue;
        visit(r, r < a ? Branch::Left : Branch::Right);
    }
    visit(a, Branch::Left);
    visit(a, Branch::Right);
    res.holds = res.max_eigenvalue <= 0.0;
    res.strict_holds = res.max_eigenvalue < -tol;
    return res;
}

void TestFunction::validate() const {
    if (r.size() < 5) throw std::invalid_argument("test function: need at least 5 grid points");
    if (values.size() != modes.size()) throw std::invalid_argument("test function: modes/values mismatch");
    for (const auto& v : values)
        if (v.size() != r.size()) throw std::invalid_argument("test function: values not on the grid");
    const double d = r[1] - r[0];
    for (std::size_t i = 1; i < r.size(); ++i)
        if (std::abs((r[i] - r[i - 1]) - d) > 1e-9 * d) throw std::invalid_argument("test function: grid not uniform");
}

TestFunction TestFunctionSpec::sample(std::size_t n_points) const {
    if (n_points < 5) throw std::invalid_argument("test function: need at least 5 points");
    TestFunction t;
    t.modes = modes;
    t.r.resize(n_points);
    const double dr = length / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) t.r[i] = r_start + dr * static_cast<double>(i);
    t.r.back() = r_start + length;
    t.values.assign(modes.size(), std::vector<cplx>(n_points, cplx(0.0)));
    for (std::size_t i = 1; i + 1 < n_points; ++i) {
        const double x = (t.r[i] - r_start) / length;
        const double win = std::exp(4.0 - 1.0 / (x * (1.0 - x)));  // peak value 1 at x = 1/2
        for (const auto& w : waves) {
            const std::size_t m = static_cast<std::size_t>(std::find(modes.begin(), modes.end(), w.mode) - modes.begin());
            t.values[m][i] += win * w.amplitude * std::polar(1.0, w.omega * (t.r[i] - r_start));
        }
    }
    return t;
}

TestFunctionSpec random_test_function(std::uint64_t seed, double r_start, double h, double E,
                                      const RandomTestOptions& opts) {
    Rng rng(seed);
    TestFunctionSpec s;
    s.r_start = r_start;
    s.length = rng.uniform(opts.length_min, opts.length_max);
    const std::size_t n_modes = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(opts.max_mode + 1));
    const double omega_max = opts.omega_factor * std::sqrt(std::max(E, 0.0)) / h;
    for (std::size_t k = 0; k < std::min(n_modes, opts.max_mode + 1); ++k) {
        const std::size_t mode = k;
        s.modes.push_back(mode);
        for (std::size_t w = 0; w < opts.waves_per_mode; ++w) {
            const cplx amp(rng.normal(), rng.normal());
            s.waves.push_back({mode, amp, rng.uniform(-omega_max, omega_max)});
        }
    }
    return s;
}

namespace {

// Centered first difference, one-sided second order at the ends.
std::vector<cplx> derivative(const std::vector<cplx>& v, double dr) {
    const std::size_t n = v.size();
    std::vector<cplx> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dr);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dr);
    return d;
}

struct RadialCoeffs {
    std::vector<double> inv_f2, g1, q0, q0p, V, phi_p, phi_pp;
};

RadialCoeffs radial_coeffs(const WeightPhase& wp, const PotentialSpec& potential, const std::vector<double>& r) {
    RadialCoeffs c;
    const std::size_t n = r.size();
    c.inv_f2.resize(n);
    c.g1.resize(n);
    c.q0.resize(n);
    c.q0p.resize(n);
    c.V.resize(n);
    c.phi_p.resize(n);
    c.phi_pp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WarpLog w = warp_log_eval(wp.profile().warp, r[i]);
        c.inv_f2[i] = std::exp(-2.0 * w.log_f);
        c.g1[i] = w.g1;
        c.q0[i] = q0_closed_form(wp.profile(), r[i]);
        c.q0p[i] = q0_prime(wp.profile(), r[i]);
        c.V[i] = potential(r[i]);
        c.phi_p[i] = wp.phi_prime(r[i]);
        c.phi_pp[i] = wp.phi_second(r[i]);
    }
    return c;
}

double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

std::vector<double> F_values(const WeightPhase& wp, const TestFunction& v, const PotentialSpec& potential) {
    v.validate();
    const double h = wp.params().h, E = wp.params().E, h2 = h * h;
    const RadialCoeffs c = radial_coeffs(wp, potential, v.r);
    std::vector<double> F(v.r.size(), 0.0);
    for (std::size_t m = 0; m < v.modes.size(); ++m) {
        const double lam = wp.profile().lambda(v.modes[m]);
        const auto dv = derivative(v.values[m], v.dr());
        for (std::size_t i = 0; i < v.r.size(); ++i) {
            const double W = h2 * lam * c.inv_f2[i] - E - c.phi_p[i] * c.phi_p[i] + h2 * c.q0[i];
            F[i] += -W * std::norm(v.values[m][i]) + h2 * std::norm(dv[i]);
        }
    }
    return F;
}

std::vector<cplx> apply_conjugated(const WeightPhase& wp, const PotentialSpec& potential, const TestFunction& v,
                                   std::size_t m, const std::vector<double>& phi, int sign) {
    const CarlemanParams& P = wp.params();
    const double h = P.h, h2 = h * h, dr = v.dr(), c = h2 / (dr * dr);
    const double lam = wp.profile().lambda(v.modes[m]);
    const std::size_t n = v.r.size();
    const auto& x = v.values[m];
    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const WarpLog w = warp_log_eval(wp.profile().warp, v.r[i]);
        const double pot = h2 * lam * std::exp(-2.0 * w.log_f) + h2 * q0_closed_form(wp.profile(), v.r[i]) +
                           potential(v.r[i]) - P.E;
        // Neighbours are zero outside the grid (Dirichlet).
        const cplx up = i + 1 < n ? std::exp((phi[i] - phi[i + 1]) / h) * x[i + 1] : cplx(0.0);
        const cplx dn = i > 0 ? std::exp((phi[i] - phi[i - 1]) / h) * x[i - 1] : cplx(0.0);
        out[i] = -c * (up - 2.0 * x[i] + dn) + cplx(pot, sign * P.epsilon_shift) * x[i];
    }
    return out;
}

FIdentityResult F_identity_check(const WeightPhase& wp, const TestFunction& v, const PotentialSpec& potential,
                                 int sign) {
    v.validate();
    const CarlemanParams& P = wp.params();
    const double h = P.h, h2 = h * h, dr = v.dr();
    const std::size_t n = v.r.size();
    const RadialCoeffs c = radial_coeffs(wp, potential, v.r);
    const std::vector<double> phi = wp.phi_on_grid(v.r);
    const std::vector<double> F = F_values(wp, v, potential);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t m = 0; m < v.modes.size(); ++m) {
        const double lam = wp.profile().lambda(v.modes[m]);
        const auto& x = v.values[m];
        const auto dv = derivative(x, dr);
        const auto Pv = apply_conjugated(wp, potential, v, m, phi, sign);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx Dv = cplx(0.0, -h) * dv[i];
            const double nv = std::norm(x[i]);
            // -<[d_r, L] v, v> + ((phi')^2 - h^2 q0)' |v|^2
            const double t1 = 2.0 * h2 * lam * c.g1[i] * c.inv_f2[i] * nv +
                              (2.0 * c.phi_p[i] * c.phi_pp[i] - h2 * c.q0p[i]) * nv;
            const double t2 = -2.0 / h * std::imag(Pv[i] * std::conj(Dv));
            const double t3 = sign * 2.0 * P.epsilon_shift / h * std::real(x[i] * std::conj(Dv));
            const double t4 = 4.0 / h * c.phi_p[i] * std::norm(Dv);
            const double t5 = 2.0 / h * std::imag((c.V[i] + h * c.phi_pp[i]) * x[i] * std::conj(Dv));
            rhs[i] += t1 + t2 + t3 + t4 + t5;
        }
    }
    FIdentityResult res;
    const double a = wp.a();
    for (std::size_t i = 2; i + 2 < n; ++i) {
        // phi'' jumps at a; keep every stencil on one side.
        if (std::abs(v.r[i] - a) <= 3.0 * dr) continue;
        const double fd = (F[i + 1] - F[i - 1]) / (2.0 * dr);
        res.max_residual = std::max(res.max_residual, std::abs(fd - rhs[i]));
        res.max_derivative = std::max(res.max_derivative, std::abs(fd));
        ++res.points;
    }
    return res;
}

double weighted_norm_log(const std::vector<double>& r, const std::vector<cplx>& x, const std::vector<double>& log_w) {
    const std::size_t n = r.size();
    std::vector<double> terms;
    terms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] == cplx(0.0)) continue;
        const double dr = (i == 0 ? r[1] - r[0] : i + 1 == n ? r[n - 1] - r[n - 2] : 0.5 * (r[i + 1] - r[i - 1]));
        const double wq = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        terms.push_back(std::log(wq * dr) + 2.0 * std::log(std::abs(x[i])) + 2.0 * log_w[i]);
    }
    if (terms.empty()) return -std::numeric_limits<double>::infinity();
    return 0.5 * log_sum_exp(terms);
}

double weighted_norm_direct(const std::vector<double>& r, const std::vector<cplx>& x,
                            const std::vector<double>& log_w, bool* clamped) {
    const std::size_t n = r.size();
    constexpr double kMaxExp = 300.0;
    double s = 0.0;
    bool cl = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double dr = (i == 0 ? r[1] - r[0] : i + 1 == n ? r[n - 1] - r[n - 2] : 0.5 * (r[i + 1] - r[i - 1]));
        const double wq = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        double e = log_w[i];
        if (std::abs(e) > kMaxExp) {
            e = std::copysign(kMaxExp, e);
            cl = true;
        }
        const double w = std::exp(e);
        s += wq * dr * std::norm(x[i] * w);
    }
    if (clamped) *clamped = cl;
    return std::sqrt(s);
}

CarlemanRatio carleman_ratio(const TestFunction& u, const ManifoldProfile& profile, const PotentialSpec& potential,
                             const CarlemanParams& params, const DerivedScales& scales, const WeightPhase& wp,
                             int sign) {
    u.validate();
    if (u.r.front() < wp.r1() * (1.0 - 1e-12)) throw std::invalid_argument("carleman_ratio: support starts below r1");
    const double h = params.h, h2 = h * h, dr = u.dr(), c = h2 / (dr * dr);
    const std::size_t n = u.r.size();
    const std::vector<double> phi = wp.phi_on_grid(u.r);
    std::vector<double> lw_minus(n), lw_plus(n), lw0(n), g1(n), inv_f2(n), q0(n), V(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lr = std::log(u.r[i]);
        lw0[i] = phi[i] / h;
        lw_minus[i] = lw0[i] - scales.s * lr;
        lw_plus[i] = lw0[i] + scales.s * lr;
        const WarpLog w = warp_log_eval(profile.warp, u.r[i]);
        g1[i] = w.g1;
        inv_f2[i] = std::exp(-2.0 * w.log_f);
        q0[i] = q0_closed_form(profile, u.r[i]);
        V[i] = potential(u.r[i]);
    }
    const double ninf = -std::numeric_limits<double>::infinity();
    double l_u = ninf, l_du = ninf, l_pu = ninf, l_u0 = ninf;
    for (std::size_t m = 0; m < u.modes.size(); ++m) {
        const auto& x = u.values[m];
        const double lam = profile.lambda(u.modes[m]);
        const auto dx = derivative(x, dr);
        std::vector<cplx> Du(n), Pu(n);
        for (std::size_t i = 0; i < n; ++i) {
            Du[i] = cplx(0.0, -h) * dx[i] + cplx(0.0, h * (profile.n - 1) * 0.5 * g1[i]) * x[i];
            const cplx up = i + 1 < n ? x[i + 1] : cplx(0.0);
            const cplx dn = i > 0 ? x[i - 1] : cplx(0.0);
            const double pot = h2 * lam * inv_f2[i] + h2 * q0[i] + V[i] - params.E;
            Pu[i] = -c * (up - 2.0 * x[i] + dn) + cplx(pot, sign * params.epsilon_shift) * x[i];
        }
        l_u = log_add(l_u, 2.0 * weighted_norm_log(u.r, x, lw_minus));
        l_du = log_add(l_du, 2.0 * weighted_norm_log(u.r, Du, lw_minus));
        l_pu = log_add(l_pu, 2.0 * weighted_norm_log(u.r, Pu, lw_plus));
        l_u0 = log_add(l_u0, 2.0 * weighted_norm_log(u.r, x, lw0));
    }
    CarlemanRatio out;
    out.log_lhs = log_add(0.5 * l_u, 0.5 * l_du);
    const double log_eh = std::log(scales.epsilon_log * h);
    const double log_fa = wp.log_fa();
    out.log_rhs_resolvent = 2.0 * log_fa - log_eh + 0.5 * l_pu;
    out.log_rhs_epsilon =
        std::log(scales.tau) + log_fa + 0.5 * std::log(params.epsilon_shift) - 0.5 * log_eh + 0.5 * l_u0;
    out.best_C = std::exp(out.log_lhs - log_add(out.log_rhs_resolvent, out.log_rhs_epsilon));
    out.epsilon_dominates = out.log_rhs_epsilon > out.log_rhs_resolvent;
    return out;
}

Quasimode build_quasimode(const ManifoldProfile& profile, const PotentialSpec& potential, double h, double r_lo,
                          double r_hi, std::size_t n_points, double E_target, const WeightPhase* wp) {
    if (n_points < 5 || !(r_hi > r_lo)) throw std::invalid_argument("quasimode: bad grid");
    Quasimode q;
    TestFunction& u = q.u;
    u.modes = {0};
    u.r.resize(n_points);
    const double dr = (r_hi - r_lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) u.r[i] = r_lo + dr * static_cast<double>(i);
    // Interior nodes carry the eigenvector; the end values stay 0.
    const std::size_t m = n_points - 2;
    const double h2 = h * h, c = h2 / (dr * dr), lam = profile.lambda(0);
    std::vector<double> d(m), e(m - 1, -c);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = u.r[i + 1];
        d[i] = 2.0 * c + h2 * lam * std::exp(-2.0 * warp_log_eval(profile.warp, r).log_f) +
               h2 * q0_closed_form(profile, r) + potential(r);
    }
    // Level closest to E_target.
    std::size_t j = sturm_count(d, e, E_target);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = (j > 0 ? j - 1 : 0); k <= std::min(j, m - 1); ++k) {
        const double ev = sturm_eigenvalue(d, e, k);
        if (std::abs(ev - E_target) < best) {
            best = std::abs(ev - E_target);
            q.energy = ev;
        }
    }
    // Inverse iteration with a tiny shift off the eigenvalue. With a phase the
    // iteration runs on the conjugated matrix, so the residual is small in the
    // weighted norm and not only in the plain one.
    std::vector<double> lphi(m, 0.0);
    if (wp) {
        const std::vector<double> phi = wp->phi_on_grid(std::vector<double>(u.r.begin() + 1, u.r.end() - 1));
        for (std::size_t i = 0; i < m; ++i) lphi[i] = phi[i] / h;
    }
    Tridiag T;
    T.diag.resize(m);
    T.sub.resize(m - 1);
    T.sup.resize(m - 1);
    const double shift = q.energy + 1e-10 * std::max(1.0, std::abs(q.energy));
    for (std::size_t i = 0; i < m; ++i) T.diag[i] = cplx(d[i] - shift, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        T.sup[i] = cplx(-c * std::exp(lphi[i] - lphi[i + 1]), 0.0);
        T.sub[i] = cplx(-c * std::exp(lphi[i + 1] - lphi[i]), 0.0);
    }
    const TridiagLU lu(T);
    std::vector<cplx> x = seeded_unit_vector(m, 7);
    for (auto& v : x) v = cplx(v.real(), 0.0);
    for (int it = 0; it < 6; ++it) {
        lu.solve(x);
        double nrm = 0.0;
        for (const auto& v : x) nrm += std::norm(v);
        nrm = std::sqrt(nrm);
        for (auto& v : x) v /= nrm;
    }
    u.values.assign(1, std::vector<cplx>(n_points, cplx(0.0)));
    for (std::size_t i = 0; i < m; ++i) u.values[0][i + 1] = cplx(x[i].real() * std::exp(-lphi[i]), 0.0);
    return q;
}

CarlemanSuite carleman_suite(const ManifoldProfile& profile, const PotentialSpec& potential,
                             const CarlemanParams& params_template, const std::vector<double>& h_list,
                             std::uint64_t seed, const CarlemanSuiteOptions& opts) {
    CarlemanSuite suite;
    const std::size_t per = opts.trials_per_h;
    suite.trials.resize(per * h_list.size());
    std::vector<CarlemanParams> params(h_list.size(), params_template);
    std::vector<DerivedScales> scales(h_list.size());
    std::vector<std::unique_ptr<WeightPhase>> wps;
    for (std::size_t k = 0; k < h_list.size(); ++k) {
        params[k].h = h_list[k];
        scales[k] = derive_scales(params[k], profile.warp, potential);
        wps.push_back(std::make_unique<WeightPhase>(params[k], scales[k], profile));
    }
    parallel_for(suite.trials.size(), opts.workers, [&](std::size_t idx) {
        const std::size_t k = idx / per;
        CarlemanTrial& t = suite.trials[idx];
        t.seed = mix_seed(seed, k, idx % per);
        t.h = h_list[k];
        t.n_points = opts.n_points;
        const TestFunctionSpec spec =
            random_test_function(t.seed, profile.r1, t.h, params[k].E, opts.random);
        t.length = spec.length;
        t.ratio = carleman_ratio(spec.sample(opts.n_points), profile, potential, params[k], scales[k], *wps[k]);
        t.ratio_refined =
            carleman_ratio(spec.sample(2 * opts.n_points - 1), profile, potential, params[k], scales[k], *wps[k]);
    });
    for (const auto& t : suite.trials) {
        suite.max_best_C = std::max(suite.max_best_C, t.ratio.best_C);
        suite.max_best_C_refined = std::max(suite.max_best_C_refined, t.ratio_refined.best_C);
    }
    return suite;
}

}  // namespace warpres
