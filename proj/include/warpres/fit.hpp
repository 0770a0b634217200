#pragma once

#include <cstddef>
#include <vector>

namespace warpres {

enum class LogPowerMode { Fixed, SelectZeroOne, Free };

struct FitModel {
    LogPowerMode mode = LogPowerMode::SelectZeroOne;
    double fixed_q = 0.0;

    static FitModel fixed(double q) { return {LogPowerMode::Fixed, q}; }
    static FitModel select() { return {LogPowerMode::SelectZeroOne, 0.0}; }
    static FitModel free() { return {LogPowerMode::Free, 0.0}; }
};

// y ~ c h^{-p} (log 1/h)^q, fitted by least squares on log y.
struct ExponentFit {
    double c = 0.0, p = 0.0, q = 0.0;
    double residual = 0.0;  // rms of log-residuals
    double h_min = 0.0, h_max = 0.0;
    std::size_t n_points = 0;
    LogPowerMode mode = LogPowerMode::Fixed;
    bool non_monotone = false;  // y not increasing as h decreases
    double p_drop_largest = 0.0;  // p refitted without the largest h
    bool stable = true;           // |p - p_drop_largest| <= 0.05
};

ExponentFit fit_exponent(const std::vector<double>& h, const std::vector<double>& y,
                         const FitModel& model, std::size_t min_points = 5);

}  // namespace warpres
