// Randomized invariant checks with fixed seeds.
#include <cmath>

#include "doctest.h"
#include "warpres/carleman.hpp"
#include "warpres/chain.hpp"
#include "warpres/report.hpp"
#include "warpres/resolvent.hpp"
#include "warpres/rng.hpp"

using namespace warpres;

TEST_CASE("resolvent bound and sign symmetry over random barriers") {
    Rng rng(2024);
    ManifoldProfile p;
    p.n = 3;
    for (int trial = 0; trial < 12; ++trial) {
        const double lo = rng.uniform(1.2, 3.0);
        const PotentialSpec V = PotentialSpec::compact({{lo, lo + rng.uniform(0.1, 1.0), rng.uniform(-1.0, 3.0)}});
        CarlemanParams P;
        P.h = rng.uniform(0.05, 0.2);
        P.E = rng.uniform(0.5, 2.0);
        P.epsilon_shift = std::pow(10.0, rng.uniform(-4.0, 0.0));
        const RadialGrid g = make_radial_grid(1.0, 8.0, grid_spacing(P.h, P.E, V.max_abs(), 16.0));
        const std::size_t mode = rng.next() % 4;
        const ModeOperator plus = build_mode_operator(p, V, P, mode, g, 1);
        const ModeOperator minus = build_mode_operator(p, V, P, mode, g, -1);
        const double sp = sigma_min(plus, false).sigma, sm = sigma_min(minus, false).sigma;
        CHECK(1.0 / sp <= (1.0 / P.epsilon_shift) * (1 + 1e-6));
        CHECK(std::abs(sp - sm) <= 1e-10 * sp);
        const double wp = sigma_min(plus, true).sigma, wm = sigma_min(minus, true).sigma;
        CHECK(1.0 / wp <= (1.0 / P.epsilon_shift) * (1 + 1e-6));
        CHECK(std::abs(wp - wm) <= 1e-10 * wp);
    }
}

TEST_CASE("banded and dense smallest singular values agree") {
    Rng rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 50 + rng.next() % 400;
        Tridiag A;
        for (std::size_t i = 0; i < n; ++i) A.diag.emplace_back(rng.normal(), rng.normal());
        for (std::size_t i = 0; i + 1 < n; ++i) {
            A.sub.emplace_back(rng.normal(), rng.normal());
            A.sup.emplace_back(rng.normal(), rng.normal());
        }
        const double d = dense_sigma_min(A);
        CHECK(std::abs(sigma_min_tridiag(A).sigma - d) <= 1e-8 * d);
    }
}

TEST_CASE("kappa schedules satisfy both selection inequalities") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double c1 = rng.uniform(0.01, 3.0), c2 = rng.uniform(0.01, 3.0), beta = rng.uniform(0.1, 3.0);
        const std::size_t L = 2 + rng.next() % 30;
        const auto k = kappa_schedule(L, c1, c2, beta);
        CHECK(k.size() == L - 1);
        CHECK(schedule_violation(k, c1, c2, beta) <= 1e-12);
        for (double x : k) CHECK(x > 0.0);
    }
}

TEST_CASE("weight and phase monotonicity across warps") {
    Rng rng(9);
    const PotentialSpec V = PotentialSpec::compact({{1.5, 3.0, 0.5}});
    for (int trial = 0; trial < 10; ++trial) {
        ManifoldProfile p;
        p.n = 2 + static_cast<int>(rng.next() % 4);
        p.warp = trial % 2 ? WarpFamily::polynomial(rng.uniform(0.5, 3.0)) : WarpFamily::exponential(rng.uniform(0.3, 1.0));
        p.r0 = 1.0;
        CarlemanParams P;
        P.h = std::exp(-rng.uniform(6.0, 12.0));
        P.t = rng.uniform(1.0, 5.0);
        p.r1 = compute_r1(p.warp, P.b, p.r0, V);
        const DerivedScales s = derive_scales(P, p.warp, V);
        if (!std::isfinite(s.a)) continue;
        const WeightPhase wp(P, s, p);
        const auto g = profile_grid(p.r1, wp.a(), GridSpec{512, 4.0, 16, 1e-3});
        const auto phi = wp.phi_on_grid(g);
        for (std::size_t i = 1; i < g.size(); ++i) {
            CHECK(phi[i] >= phi[i - 1] - 1e-12 * std::abs(phi[i]));
            CHECK(wp.eval(g[i]).log_mu >= wp.eval(g[i - 1]).log_mu - 1e-12);
        }
        for (std::size_t i = 0; i < g.size(); i += 37) CHECK(phi[i] == doctest::Approx(wp.phi(g[i])).epsilon(1e-8));
    }
}

TEST_CASE("csv cells round-trip exactly") {
    Rng rng(31);
    CsvTable t;
    t.header = {"a", "b"};
    for (int i = 0; i < 500; ++i) {
        const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.next() % 200) - 100);
        t.add_row({fmt_num(x), fmt_int(rng.next())});
    }
    const CsvTable u = parse_csv(t.to_string());
    CHECK(u.rows == t.rows);
    const auto a = t.numbers("a"), b = u.numbers("a");
    CHECK(a == b);
}

TEST_CASE("mix_seed separates streams") {
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
    CHECK(mix_seed(1, 2, 0) == mix_seed(1, 2));
}
