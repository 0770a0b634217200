#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace warpres {

enum class WarpKind { Polynomial, Exponential };

// f(r) = r^k (Polynomial) or f(r) = exp(r^alpha) (Exponential).
struct WarpFamily {
    WarpKind kind = WarpKind::Polynomial;
    double param = 1.0;  // k or alpha

    static WarpFamily polynomial(double k);
    static WarpFamily exponential(double alpha);

    void validate() const;
    std::string describe() const;
};

struct WarpValue {
    double f, fp, fpp;
};

// log f together with the logarithmic derivatives f'/f and f''/f.
// Exponential warps overflow f long before these do.
struct WarpLog {
    double log_f, g1, g2;
};

WarpValue warp_eval(const WarpFamily& warp, double r);
WarpLog warp_log_eval(const WarpFamily& warp, double r);

struct ManifoldProfile {
    int n = 3;
    WarpFamily warp;
    double r0 = 1.0;
    double r1 = 1.0;
    // Eigenvalues of -Delta_omega. Empty means the round sphere, l(l+n-2).
    std::vector<double> angular_spectrum;
    double c_sharp = 1.0;

    void validate() const;
    double lambda(std::size_t j) const;
    // Number of available modes (SIZE_MAX for the round sphere).
    std::size_t spectrum_size() const;
};

struct Segment {
    double lo, hi, value;
};

enum class PotentialKind { CompactSupport, Decaying };

// Piecewise constant L-infinity part plus, for Decaying, an optional tail
// tail_amplitude * r^{-delta} f(r)^{-2} on [tail_start, inf).
struct PotentialSpec {
    PotentialKind kind = PotentialKind::CompactSupport;
    std::vector<Segment> segments;
    double support_end = 0.0;
    double delta = 2.0;
    double envelope_const = 1.0;
    double tail_amplitude = 0.0;
    double tail_start = 0.0;
    WarpFamily warp;  // needed by the tail term

    static PotentialSpec zero();
    static PotentialSpec compact(std::vector<Segment> segs);
    static PotentialSpec decaying(std::vector<Segment> segs, double delta, double envelope_const,
                                  const WarpFamily& warp, double tail_amplitude = 0.0,
                                  double tail_start = 0.0);

    void validate() const;
    double operator()(double r) const;
    double max_abs() const;
    bool compact_support() const { return kind == PotentialKind::CompactSupport; }
    // Largest value of |V| r^delta f^2 / envelope_const over the samples; <= 1 means admissible.
    double envelope_ratio(const std::vector<double>& r_samples) const;
};

double q0_eval(const ManifoldProfile& profile, double r);
double q0_closed_form(const ManifoldProfile& profile, double r);
double q0_prime(const ManifoldProfile& profile, double r);

enum class Q0Reason { ExponentialWarp, NonincreasingQ0, SlowGrowth, DimensionTwoMidK };

struct Q0Classification {
    bool holds;
    Q0Reason reason;
};

Q0Classification q0_condition_classify(const ManifoldProfile& profile);
std::string to_string(Q0Reason reason);

double m0_compute(const WarpFamily& warp, const PotentialSpec& potential);

struct BoundExponent {
    double p;
    double log_power;
};

BoundExponent predicted_bound_exponent(const ManifoldProfile& profile, const PotentialSpec& potential);

// Smallest r >= r0 with f(r) >= 2b (and r >= support_end for compact support),
// rounded up to a multiple of anchor when anchor > 0.
double compute_r1(const WarpFamily& warp, double b, double r0, const PotentialSpec& potential,
                  double anchor = 0.0);

// min over samples of r f'(r)/f(r): the explicit constant in f' >= C r^{-1} f.
double certify_growth_constant(const WarpFamily& warp, const std::vector<double>& r_samples);

std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace warpres
