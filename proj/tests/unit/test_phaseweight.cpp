#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "warpres/phaseweight.hpp"

using namespace warpres;

namespace {

struct Fixture {
    ManifoldProfile profile;
    PotentialSpec potential = PotentialSpec::compact({{1.5, 3.0, 0.5}});
    CarlemanParams params;

    explicit Fixture(double h, double t = 3.0, WarpFamily w = WarpFamily::polynomial(1.0)) {
        profile.n = 3;
        profile.warp = w;
        profile.r0 = 1.0;
        params.h = h;
        params.t = t;
        params.b = 4.0;
        profile.r1 = compute_r1(w, params.b, profile.r0, potential);
    }
    DerivedScales scales() const { return derive_scales(params, profile.warp, potential); }
    WeightPhase model() const { return WeightPhase(params, scales(), profile); }
};

}  // namespace

TEST_CASE("derived scales") {
    Fixture fx(std::exp(-10.0), 1.0);
    const DerivedScales s = fx.scales();
    CHECK(s.epsilon_log == doctest::Approx(0.1));
    CHECK(s.s == doctest::Approx(0.55));
    CHECK(s.lambda_loglog == doctest::Approx(std::log(10.0)));
    CHECK(s.m == doctest::Approx(2.0 / 3.0 + 0.1));
    CHECK(s.log_a == doctest::Approx(10.0 * (2.0 / 3.0 + 0.1)));

    Fixture g(1e-3);
    g.params.tau0 = 5.0;
    CHECK(g.scales().tau == doctest::Approx(50.0));

    Fixture big(0.5);
    CHECK_THROWS(big.scales());
}

TEST_CASE("weight is continuous at a and phase flattens beyond it") {
    for (double x : {6.0, 10.0, 14.0}) {
        const WeightPhase wp = Fixture(std::exp(-x)).model();
        const double a = wp.a();
        const PointValues l = wp.eval(a, Branch::Left), r = wp.eval(a, Branch::Right);
        CHECK(std::abs(std::exp(l.log_mu - r.log_mu) - 1.0) < 1e-12);
        CHECK(wp.phi_prime(a) == 0.0);
        const PointValues far = wp.eval(3.0 * a);
        CHECK(far.A_norm == 0.0);
        CHECK(far.phi == doctest::Approx(wp.phase_max()));
    }
}

TEST_CASE("weight derivative beyond a") {
    const Fixture fx(std::exp(-8.0));
    const WeightPhase wp = fx.model();
    const DerivedScales s = fx.scales();
    for (double f : {1.5, 4.0, 9.0}) {
        const double r = f * wp.a();
        CHECK(std::exp(wp.eval(r).log_mu_prime) == doctest::Approx(s.epsilon_log * std::pow(r, -2.0 * s.s)).epsilon(1e-12));
    }
}

TEST_CASE("mu over mu' for the linear warp") {
    const WeightPhase wp = Fixture(std::exp(-8.0)).model();
    for (double r : {9.0, 30.0, 200.0}) {
        const PointValues v = wp.eval(r, Branch::Left);
        CHECK(std::exp(v.log_rho) == doctest::Approx((r - 4.0) / 2.0).epsilon(1e-12));
        CHECK(std::exp(v.log_rho) <= r / 2.0);
    }
}

TEST_CASE("phase maximum closed form against the grid accumulation") {
    const Fixture fx(std::exp(-10.0));
    const WeightPhase wp = fx.model();
    const double a = wp.a(), r1 = fx.profile.r1, tau = fx.scales().tau;
    const double closed = tau * (std::log(a / r1) - (a - r1) / a);
    CHECK(wp.phase_max() == doctest::Approx(closed).epsilon(1e-12));
    const auto prof = build_profile(fx.params, fx.scales(), fx.profile);
    CHECK(phase_max(prof) == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("phase derivatives against finite differences") {
    for (const WarpFamily w : {WarpFamily::polynomial(0.5), WarpFamily::polynomial(2.0), WarpFamily::exponential(1.0)}) {
        const WeightPhase wp = Fixture(std::exp(-8.0), 3.0, w).model();
        const double r = wp.r1() + 0.3 * (wp.a() - wp.r1());
        const double d = 1e-5 * r;
        CHECK(wp.phi_prime(r) == doctest::Approx((wp.phi(r + d) - wp.phi(r - d)) / (2 * d)).epsilon(1e-6));
        CHECK(wp.phi_second(r) == doctest::Approx((wp.phi_prime(r + d) - wp.phi_prime(r - d)) / (2 * d)).epsilon(1e-6));
    }
}

TEST_CASE("ratio bounds are finite for the exponential warp") {
    Fixture fx(1e-2, 3.0, WarpFamily::exponential(1.0));
    const DerivedScales s = fx.scales();
    const auto prof = build_profile(fx.params, s, fx.profile);
    const RatioBounds rb = check_ratio_bounds(prof, s);
    CHECK(std::isfinite(rb.c32));
    CHECK(std::isfinite(rb.c33));
}

TEST_CASE("profile grid covers both sides of a without containing it") {
    const Fixture fx(std::exp(-8.0));
    const auto prof = build_profile(fx.params, fx.scales(), fx.profile);
    for (std::size_t i = 1; i < prof.grid.size(); ++i) CHECK(prof.grid[i] > prof.grid[i - 1]);
    CHECK(std::find(prof.grid.begin(), prof.grid.end(), prof.a) == prof.grid.end());
    // mu increases throughout
    for (std::size_t i = 1; i < prof.log_mu.size(); ++i) CHECK(prof.log_mu[i] >= prof.log_mu[i - 1]);
}

TEST_CASE("key inequality on the certified fixture") {
    for (double x : {6.0, 8.0, 10.0, 12.0, 14.0}) {
        const Fixture fx(std::exp(-x));
        const DerivedScales s = fx.scales();
        const auto prof = build_profile(fx.params, s, fx.profile);
        const KeyInequalityReport rep = check_key_inequality(prof, fx.params, s, fx.params.E);
        CHECK(rep.holds);
        CHECK(rep.margin_left_at_a >= 0.0);
        CHECK(rep.margin_right_at_a >= 0.0);
    }
}

TEST_CASE("beyond a the margin tends to E/2") {
    const Fixture fx(std::exp(-12.0));
    const WeightPhase wp = fx.model();
    CHECK(wp.eval(5.0 * wp.a()).margin == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("large tau0 violates the key inequality and names the radius") {
    Fixture fx(std::exp(-6.0));
    fx.params.tau0 = 100.0;
    const DerivedScales s = fx.scales();
    const auto prof = build_profile(fx.params, s, fx.profile);
    const KeyInequalityReport rep = check_key_inequality(prof, fx.params, s, fx.params.E);
    CHECK_FALSE(rep.holds);
    CHECK(rep.worst_r < prof.a);
    CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("dropping the penalty never shrinks the admissible range") {
    Fixture fx(std::exp(-6.0));
    const std::vector<double> hs{std::exp(-6.0), std::exp(-8.0)};
    const Tau0Result with = find_admissible_tau0(fx.params, fx.profile, fx.potential, hs, 1e-3, 1e3);
    fx.params.ineq_const_C = 0.0;
    const Tau0Result without = find_admissible_tau0(fx.params, fx.profile, fx.potential, hs, 1e-3, 1e3);
    CHECK(without.tau0_star <= with.tau0_star);
    CHECK(with.holds_at_double);
}

TEST_CASE("phase scaling exponent for the compact linear warp") {
    Fixture fx(std::exp(-6.0));
    std::vector<double> hs;
    for (int x = 6; x <= 14; ++x) hs.push_back(std::exp(-double(x)));
    const PhaseScaling ps = phase_max_scaling(fx.params, fx.profile, fx.potential, hs, FitModel::fixed(1.0));
    CHECK(std::abs(ps.fit.p - 4.0 / 3.0) < 0.05);
}

TEST_CASE("exponential-warp phase against the incomplete gamma function") {
    for (double alpha : {0.5, 1.0}) {
        for (double x : {6.0, 14.0}) {
            const Fixture fx(std::exp(-x), 3.0, WarpFamily::exponential(alpha));
            const WeightPhase wp = fx.model();
            const double s = 1.0 / alpha, r1 = fx.profile.r1, tau = fx.scales().tau, a = wp.a();
            auto integral = [&](double r) {
                return s * (boost::math::tgamma(s, std::pow(r1, alpha)) - boost::math::tgamma(s, std::pow(r, alpha)));
            };
            const double inv_fa = std::exp(-std::pow(a, alpha));
            for (double r : {r1 + 0.5, 2.0 * r1, 0.5 * a}) {
                const double exact = tau * (integral(r) - (r - r1) * inv_fa);
                CHECK(wp.phi(r) == doctest::Approx(exact).epsilon(1e-10));
            }
        }
    }
}
