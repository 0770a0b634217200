#include "warpres/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace warpres {

namespace {

struct Raw {
    double logc, p, q, rms;
};

// Columns 1, x, log x with x = log(1/h); the q column is moved to the right side when fixed.
Raw solve(const std::vector<double>& x, const std::vector<double>& ly, bool free_q, double q) {
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    const Eigen::Index cols = free_q ? 3 : 2;
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = x[i];
        if (free_q) {
            A(i, 2) = std::log(x[i]);
            b(i) = ly[i];
        } else {
            b(i) = ly[i] - q * std::log(x[i]);
        }
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd res = A * sol - b;
    Raw r{sol(0), sol(1), free_q ? sol(2) : q, std::sqrt(res.squaredNorm() / static_cast<double>(n))};
    return r;
}

Raw fit_raw(const std::vector<double>& x, const std::vector<double>& ly, const FitModel& model) {
    switch (model.mode) {
        case LogPowerMode::Fixed: return solve(x, ly, false, model.fixed_q);
        case LogPowerMode::Free: return solve(x, ly, true, 0.0);
        case LogPowerMode::SelectZeroOne: {
            const Raw a = solve(x, ly, false, 0.0);
            const Raw b = solve(x, ly, false, 1.0);
            return b.rms < a.rms ? b : a;
        }
    }
    throw std::logic_error("unknown fit mode");
}

}  // namespace

ExponentFit fit_exponent(const std::vector<double>& h, const std::vector<double>& y,
                         const FitModel& model, std::size_t min_points) {
    if (h.size() != y.size()) throw std::invalid_argument("fit_exponent: size mismatch");
    if (h.size() < min_points) throw std::invalid_argument("fit_exponent: too few points");
    std::vector<std::size_t> order(h.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return h[a] > h[b]; });
    std::vector<double> x, ly;
    ExponentFit out;
    out.mode = model.mode;
    out.n_points = h.size();
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i : order) {
        if (!(h[i] > 0.0 && h[i] < 1.0)) throw std::invalid_argument("fit_exponent: h outside (0,1)");
        if (!(y[i] > 0.0)) throw std::invalid_argument("fit_exponent: values must be positive");
        x.push_back(std::log(1.0 / h[i]));
        ly.push_back(std::log(y[i]));
        if (y[i] < prev) out.non_monotone = true;
        prev = y[i];
    }
    out.h_max = h[order.front()];
    out.h_min = h[order.back()];
    const Raw r = fit_raw(x, ly, model);
    out.c = std::exp(r.logc);
    out.p = r.p;
    out.q = r.q;
    out.residual = r.rms;
    const std::size_t need = model.mode == LogPowerMode::Free ? 4 : 3;
    if (x.size() > need) {
        std::vector<double> x2(x.begin() + 1, x.end()), ly2(ly.begin() + 1, ly.end());
        FitModel m2 = model;
        if (model.mode == LogPowerMode::SelectZeroOne) m2 = FitModel::fixed(out.q);
        out.p_drop_largest = fit_raw(x2, ly2, m2).p;
    } else {
        out.p_drop_largest = out.p;
    }
    out.stable = std::abs(out.p - out.p_drop_largest) <= 0.05;
    return out;
}

}  // namespace warpres
