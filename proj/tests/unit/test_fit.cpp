#include <cmath>
#include <vector>

#include "doctest.h"
#include "warpres/fit.hpp"

using namespace warpres;

namespace {

std::vector<double> h_range(double lo, double hi, int n) {
    std::vector<double> h;
    for (int i = 0; i < n; ++i) h.push_back(hi * std::pow(lo / hi, double(i) / (n - 1)));
    return h;
}

}  // namespace

TEST_CASE("exact power recovery") {
    const auto h = h_range(1e-4, 1e-1, 8);
    std::vector<double> y;
    for (double x : h) y.push_back(7.0 * std::pow(x, -4.0 / 3.0));
    const ExponentFit f = fit_exponent(h, y, FitModel::fixed(0.0));
    CHECK(f.p == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(f.c == doctest::Approx(7.0).epsilon(1e-10));
    CHECK(f.residual < 1e-10);
    CHECK(f.stable);
    CHECK_FALSE(f.non_monotone);
}

TEST_CASE("power times log with fixed log power") {
    const auto h = h_range(1e-5, 1e-1, 9);
    std::vector<double> y;
    for (double x : h) y.push_back(3.0 / x * std::log(1.0 / x));
    const ExponentFit f = fit_exponent(h, y, FitModel::fixed(1.0));
    CHECK(std::abs(f.p - 1.0) < 1e-8);
    CHECK(f.q == 1.0);
}

TEST_CASE("log power selection and free fit") {
    const auto h = h_range(1e-6, 1e-1, 10);
    std::vector<double> y;
    for (double x : h) y.push_back(2.0 * std::pow(x, -0.5) * std::log(1.0 / x));
    const ExponentFit s = fit_exponent(h, y, FitModel::select());
    CHECK(s.q == 1.0);
    CHECK(s.p == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(s.mode == LogPowerMode::SelectZeroOne);

    std::vector<double> z;
    for (double x : h) z.push_back(std::pow(x, -2.0) * std::pow(std::log(1.0 / x), 0.5));
    const ExponentFit fr = fit_exponent(h, z, FitModel::free());
    CHECK(fr.p == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(fr.q == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("diagnostics and preconditions") {
    const auto h = h_range(1e-3, 1e-1, 6);
    std::vector<double> y{1.0, 3.0, 2.0, 4.0, 5.0, 6.0};
    CHECK(fit_exponent(h, y, FitModel::fixed(0.0)).non_monotone);
    CHECK_THROWS(fit_exponent({0.1, 0.01}, {1.0, 2.0}, FitModel::fixed(0.0)));
    CHECK_THROWS(fit_exponent(h, {1, 2, 3, 4, 5, -1}, FitModel::fixed(0.0)));
}
