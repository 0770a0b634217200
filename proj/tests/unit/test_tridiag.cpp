#include <cmath>

#include "doctest.h"
#include "warpres/rng.hpp"
#include "warpres/tridiag.hpp"

using namespace warpres;

namespace {

Tridiag random_tridiag(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Tridiag A;
    for (std::size_t i = 0; i < n; ++i) A.diag.emplace_back(rng.normal(), rng.normal());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        A.sub.emplace_back(rng.normal(), rng.normal());
        A.sup.emplace_back(rng.normal(), rng.normal());
    }
    return A;
}

Tridiag free_dirichlet(std::size_t n) {
    Tridiag A;
    A.diag.assign(n, cplx(2.0, 0.0));
    A.sub.assign(n - 1, cplx(-1.0, 0.0));
    A.sup.assign(n - 1, cplx(-1.0, 0.0));
    return A;
}

}  // namespace

TEST_CASE("sigma_min of trivial operators") {
    Tridiag I;
    I.diag.assign(5, cplx(1.0, 0.0));
    I.sub.assign(4, cplx(0.0, 0.0));
    I.sup.assign(4, cplx(0.0, 0.0));
    CHECK(sigma_min_tridiag(I).sigma == doctest::Approx(1.0).epsilon(1e-12));

    Tridiag D;
    D.diag = {cplx(2, 0), cplx(0, 3), cplx(-5, 0)};
    D.sub.assign(2, cplx(0, 0));
    D.sup.assign(2, cplx(0, 0));
    CHECK(sigma_min_tridiag(D).sigma == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dense_sigma_min(D) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("free Dirichlet operator matches the dense SVD and the exact spectrum") {
    const std::size_t n = 500;
    const Tridiag A = free_dirichlet(n);
    const double exact = 2.0 - 2.0 * std::cos(M_PI / (n + 1));
    const double s = sigma_min_tridiag(A).sigma;
    CHECK(std::abs(s - dense_sigma_min(A)) <= 1e-8 * s);
    CHECK(std::abs(s - exact) <= 1e-8 * exact);
}

TEST_CASE("LU solves and adjoint solves have small backward error") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Tridiag A = random_tridiag(300, seed);
        const TridiagLU lu(A);
        REQUIRE_FALSE(lu.singular());
        const std::vector<cplx> b = seeded_unit_vector(300, seed + 100);
        std::vector<cplx> x = b;
        lu.solve(x);
        CHECK(backward_error(A, x, b) <= 1e-14);

        Tridiag AH;
        for (auto z : A.diag) AH.diag.push_back(std::conj(z));
        for (auto z : A.sup) AH.sub.push_back(std::conj(z));
        for (auto z : A.sub) AH.sup.push_back(std::conj(z));
        std::vector<cplx> y = b;
        lu.solve_adjoint(y);
        CHECK(backward_error(AH, y, b) <= 1e-14);
    }
}

TEST_CASE("random operators against the dense oracle") {
    for (std::uint64_t seed = 11; seed <= 16; ++seed) {
        const Tridiag A = random_tridiag(200 + 37 * seed, seed);
        SigmaOptions o;
        o.seed = seed;
        const SigmaResult r = sigma_min_tridiag(A, o);
        const double d = dense_sigma_min(A);
        CHECK(std::abs(r.sigma - d) <= 1e-8 * d);
    }
}

TEST_CASE("seeded start vectors are reproducible and normalized") {
    const auto a = seeded_unit_vector(64, 9), b = seeded_unit_vector(64, 9), c = seeded_unit_vector(64, 10);
    CHECK(a == b);
    CHECK(a != c);
    double n2 = 0;
    for (auto z : a) n2 += std::norm(z);
    CHECK(n2 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Sturm counts and eigenvalues") {
    const std::size_t n = 50;
    std::vector<double> d(n, 2.0), e(n - 1, -1.0);
    for (std::size_t j : {0, 7, 49}) {
        const double exact = 2.0 - 2.0 * std::cos(M_PI * (j + 1) / (n + 1));
        CHECK(sturm_eigenvalue(d, e, j) == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(sturm_count(d, e, 0.0) == 0);
    CHECK(sturm_count(d, e, 4.0) == n);
}

TEST_CASE("malformed operators are rejected") {
    Tridiag A;
    A.diag.assign(3, cplx(1, 0));
    A.sub.assign(1, cplx(0, 0));
    A.sup.assign(2, cplx(0, 0));
    CHECK_THROWS(A.validate());
}
