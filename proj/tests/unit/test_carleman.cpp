#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "warpres/carleman.hpp"

using namespace warpres;

namespace {

struct Fixture {
    ManifoldProfile profile;
    PotentialSpec potential = PotentialSpec::compact({{1.5, 3.0, 0.5}});
    CarlemanParams params;

    explicit Fixture(double h, WarpFamily w = WarpFamily::polynomial(1.0), double b = 4.0) {
        profile.n = 3;
        profile.warp = w;
        profile.r0 = 1.0;
        params.h = h;
        params.t = 3.0;
        params.b = b;
        params.epsilon_shift = 0.01;
        profile.r1 = compute_r1(w, b, profile.r0, potential);
    }
    DerivedScales scales() const { return derive_scales(params, profile.warp, potential); }
    WeightPhase model(WeightOptions o = {}) const { return WeightPhase(params, scales(), profile, o); }
};

}  // namespace

TEST_CASE("b selection") {
    CHECK(b_selection(1.0, 1.0) == 4.0);
    CHECK(b_selection(2.0, 1.0) == 2.0);
    CHECK(b_selection(0.5, 3.0) == 24.0);
    CHECK_THROWS(b_selection(0.0, 1.0));
}

TEST_CASE("random matrices") {
    const Eigen::MatrixXd s = random_unit_symmetric(4, 3);
    CHECK((s - s.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    CHECK(std::max(std::abs(es.eigenvalues().minCoeff()), std::abs(es.eigenvalues().maxCoeff())) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::MatrixXd w = random_omega(3, 0.7, 9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(w);
    CHECK(ew.eigenvalues().minCoeff() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("metric check: exact warp has the sign of (mu f^-2)'") {
    const Fixture fx(0.01);
    const WeightPhase wp = fx.model();
    const auto r = log_grid(fx.profile.r1, 10.0 * wp.a(), 2000);
    const PhiCheckResult pc = phi_matrix_check(MetricPerturbation::exact(Eigen::MatrixXd::Identity(2, 2), 1.0), wp, r);
    // (mu f^-2)' = 2(1 - b/f) b f'/f^2 > 0 on r < a, negative beyond a
    CHECK(pc.max_left > 0.0);
    CHECK(pc.max_right < 0.0);
    CHECK_FALSE(pc.holds);
    const PointValues v = wp.eval(2.0 * fx.profile.r1, Branch::Left);
    const double u = 4.0 * std::exp(-v.log_f);
    CHECK(pc.max_left >= 2.0 * (1.0 - u) * 4.0 - 1e-12);
}

TEST_CASE("metric check: the mirrored weight makes r < a negative") {
    const Fixture fx(0.01);
    WeightOptions o;
    o.mirror = true;
    const WeightPhase wp = fx.model(o);
    const auto r = log_grid(fx.profile.r1, 10.0 * wp.a(), 2000);
    const PhiCheckResult pc = phi_matrix_check(MetricPerturbation::exact(Eigen::MatrixXd::Identity(2, 2), 1.0), wp, r);
    CHECK(pc.max_left < 0.0);
}

TEST_CASE("metric check: b = 0 is the marginal case") {
    Fixture fx(0.01);
    fx.params.b = 0.0;
    const WeightPhase wp = fx.model();
    const auto r = log_grid(fx.profile.r1, wp.a() * 0.999, 500);
    const PhiCheckResult pc = phi_matrix_check(MetricPerturbation::exact(Eigen::MatrixXd::Identity(2, 2), 1.0), wp, r);
    INFO("max_left " << pc.max_left << " max_right " << pc.max_right);
    CHECK(std::abs(pc.max_left) < 1e-12);
    CHECK(pc.holds);
    CHECK_FALSE(pc.strict_holds);
}

TEST_CASE("metric perturbation validation") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const auto ok = MetricPerturbation::constant(id, 1.0, random_unit_symmetric(2, 1), random_unit_symmetric(2, 2));
    CHECK_NOTHROW(ok.validate(1.0, {2.0, 5.0}));
    const auto big = MetricPerturbation::constant(id, 1.0, 2.0 * random_unit_symmetric(2, 1), random_unit_symmetric(2, 2));
    CHECK_THROWS(big.validate(1.0, {2.0}));
    CHECK_THROWS(MetricPerturbation::exact(0.5 * id, 1.0).validate(1.0, {2.0}));
}

TEST_CASE("test functions") {
    const TestFunctionSpec spec = random_test_function(3, 8.0, 0.05, 1.0);
    const TestFunction v = spec.sample(1000);
    CHECK_NOTHROW(v.validate());
    CHECK(v.r.front() == 8.0);
    for (const auto& m : v.values) {
        CHECK(std::abs(m.front()) == 0.0);
        CHECK(std::abs(m.back()) < 1e-12);
    }
    const TestFunction w = random_test_function(3, 8.0, 0.05, 1.0).sample(1000);
    CHECK(w.values == v.values);
}

TEST_CASE("F identity") {
    const Fixture fx(0.1);
    const WeightPhase wp = fx.model();
    TestFunction zero = random_test_function(1, fx.profile.r1, 0.1, 1.0).sample(500);
    for (auto& m : zero.values) std::fill(m.begin(), m.end(), cplx(0.0, 0.0));
    const FIdentityResult z = F_identity_check(wp, zero, fx.potential);
    CHECK(z.max_residual == 0.0);

    const TestFunctionSpec spec = random_test_function(5, fx.profile.r1, 0.1, 1.0);
    const FIdentityResult a = F_identity_check(wp, spec.sample(2000), fx.potential);
    const FIdentityResult b = F_identity_check(wp, spec.sample(3999), fx.potential);
    CHECK(a.max_residual < 1e-2 * a.max_derivative);
    CHECK(a.max_residual / b.max_residual == doctest::Approx(4.0).epsilon(0.15));
    CHECK(F_values(wp, spec.sample(2000), fx.potential).front() == 0.0);
}

TEST_CASE("weighted norms agree where the direct form does not overflow") {
    std::vector<double> r{0.0, 0.1, 0.2, 0.3};
    std::vector<cplx> x{1.0, cplx(0, 2), -1.0, 0.5};
    std::vector<double> lw{0.0, 1.0, -2.0, 3.0};
    CHECK(std::exp(weighted_norm_log(r, x, lw)) == doctest::Approx(weighted_norm_direct(r, x, lw)).epsilon(1e-14));
    for (auto& w : lw) w += 500.0;
    bool clamped = false;
    weighted_norm_direct(r, x, lw, &clamped);
    CHECK(clamped);
    CHECK(std::isfinite(weighted_norm_log(r, x, lw)));
}

TEST_CASE("Carleman ratio for functions supported beyond a") {
    const Fixture fx(0.1);
    const DerivedScales s = fx.scales();
    const WeightPhase wp = fx.model();
    const TestFunction u = random_test_function(4, 1.5 * wp.a(), 0.1, 1.0).sample(2000);
    const CarlemanRatio c = carleman_ratio(u, fx.profile, fx.potential, fx.params, s, wp);
    CHECK(std::isfinite(c.best_C));
    CHECK(c.best_C > 0.0);
    // the phase is constant there, so a shift of every log term by phi_max/h cancels
    CHECK(c.log_lhs - c.log_rhs_resolvent < 50.0);
}

TEST_CASE("random suite is stable under grid doubling and reproducible") {
    const Fixture fx(0.1);
    CarlemanSuiteOptions o;
    o.trials_per_h = 10;
    o.n_points = 2000;
    const CarlemanSuite a = carleman_suite(fx.profile, fx.potential, fx.params, {0.01}, 17, o);
    CHECK(a.trials.size() == 10);
    CHECK(a.max_best_C_refined < 2.0 * a.max_best_C);
    CHECK(a.max_best_C_refined > 0.5 * a.max_best_C);
    o.workers = 3;
    const CarlemanSuite b = carleman_suite(fx.profile, fx.potential, fx.params, {0.01}, 17, o);
    CHECK(b.max_best_C == a.max_best_C);
}

TEST_CASE("quasimodes of a trapping well are dominated by the shift term") {
    ManifoldProfile p;
    p.n = 3;
    p.r0 = 1.0;
    p.r1 = 8.0;
    const PotentialSpec V = PotentialSpec::decaying({{8.0, 9.0, 3.0}, {13.0, 14.01, 3.0}}, 6.0, 1e12, p.warp);
    CarlemanParams P;
    P.E = 1.0;
    P.epsilon_shift = 1e-10;
    P.t = 1.0;
    P.delta = 6.0;
    P.compact_support = false;
    P.h = 0.01;
    const DerivedScales s0 = derive_scales(P, p.warp, V);
    const WeightPhase wp0(P, s0, p);
    const Quasimode q = build_quasimode(p, V, P.h, 8.0, 14.0, 4000, 1.0, &wp0);
    CHECK(std::abs(q.energy - 1.0) < 0.2);
    P.E = q.energy;
    const DerivedScales s = derive_scales(P, p.warp, V);
    const WeightPhase wp(P, s, p);
    const CarlemanRatio c = carleman_ratio(q.u, p, V, P, s, wp);
    CHECK(c.epsilon_dominates);
    CHECK(std::isfinite(c.best_C));
}
