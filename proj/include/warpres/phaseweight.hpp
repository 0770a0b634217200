#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "warpres/fit.hpp"
#include "warpres/geometry.hpp"

namespace warpres {

struct CarlemanParams {
    double h = 0.01;
    double E = 1.0;
    double epsilon_shift = 0.1;
    double delta = 2.0;
    double tau0 = 1.0;
    double t = 20.0;
    double b = 4.0;
    double ineq_const_C = 1.0;
    bool compact_support = true;

    void validate() const;
};

struct DerivedScales {
    double epsilon_log = 0.0;
    double s = 0.0;
    double lambda_loglog = 0.0;
    double m0 = 0.0;
    double m = 0.0;
    double log_a = 0.0;
    double a = 0.0;
    double tau = 0.0;
};

DerivedScales derive_scales(const CarlemanParams& params, const WarpFamily& warp,
                            const PotentialSpec& potential);

enum class Branch { Left, Right };

struct WeightOptions {
    // Use (f+b)^2 in place of (f-b)^2 on [r1, a]. Diagnostic only.
    bool mirror = false;
};

// Everything the key inequality needs at one radius. Quantities carrying the
// size of mu are kept as logs; *_norm fields are divided by mu'.
struct PointValues {
    double r = 0.0;
    Branch branch = Branch::Left;
    double log_f = 0.0, g1 = 0.0;
    double log_mu = 0.0, log_mu_prime = 0.0, log_rho = 0.0;
    double phi = 0.0, phi_prime = 0.0, phi_second = 0.0;
    double q0 = 0.0;
    double A_norm = 0.0, B_norm = 0.0, muq0p_norm = 0.0;
    double margin = 0.0;
};

// Pointwise weight/phase model for one (params, scales, profile).
class WeightPhase {
public:
    WeightPhase(const CarlemanParams& params, const DerivedScales& scales,
                const ManifoldProfile& profile, WeightOptions opts = {});

    PointValues eval(double r, Branch branch) const;
    PointValues eval(double r) const { return eval(r, r < a_ ? Branch::Left : Branch::Right); }

    double mu_shift() const { return opts_.mirror ? -params_.b : params_.b; }
    double phi(double r) const;
    double phi_prime(double r) const;
    double phi_second(double r) const;
    // phi on an increasing grid, accumulated piecewise.
    std::vector<double> phi_on_grid(const std::vector<double>& r) const;
    double phase_max() const { return phi_a_; }

    double a() const { return a_; }
    double log_fa() const { return log_fa_; }
    double r1() const { return profile_.r1; }
    const CarlemanParams& params() const { return params_; }
    const DerivedScales& scales() const { return scales_; }
    const ManifoldProfile& profile() const { return profile_; }

private:
    double integral_inv_f(double lo, double hi) const;

    CarlemanParams params_;
    DerivedScales scales_;
    ManifoldProfile profile_;
    WeightOptions opts_;
    double a_;
    double log_fa_;
    double inv_fa_;
    double phi_a_;
};

struct GridSpec {
    std::size_t base_points = 4096;
    double r_max_factor = 10.0;
    std::size_t refine_points = 256;
    double refine_halfwidth = 1e-3;
};

std::vector<double> profile_grid(double r1, double a, const GridSpec& spec);

struct WeightPhaseProfile {
    std::vector<double> grid;
    std::vector<double> mu, mu_prime, phi, phi_prime, phi_second, A, B, q0, mu_q0_prime;
    std::vector<double> log_mu, log_mu_prime, A_norm, B_norm, muq0p_norm, margin;
    PointValues at_a_left, at_a_right;
    double a = 0.0;
    double r1 = 0.0;
    double log_fa = 0.0;
};

WeightPhaseProfile build_profile(const CarlemanParams& params, const DerivedScales& scales,
                                 const ManifoldProfile& profile, const GridSpec& grid_spec = {},
                                 WeightOptions opts = {});

struct RatioBounds {
    double c32 = 0.0;
    double c33 = 0.0;
};

RatioBounds check_ratio_bounds(const WeightPhaseProfile& prof, const DerivedScales& scales);

double phase_max(const WeightPhaseProfile& prof);

struct PhaseScaling {
    std::vector<double> h;
    std::vector<double> phase_max_over_h;
    ExponentFit fit;
};

PhaseScaling phase_max_scaling(const CarlemanParams& params_template, const ManifoldProfile& profile,
                               const PotentialSpec& potential, const std::vector<double>& h_list,
                               const FitModel& model);

struct KeyInequalityReport {
    bool holds = false;
    std::vector<double> margin;  // aligned with the profile grid
    double margin_left_at_a = 0.0;
    double margin_right_at_a = 0.0;
    double worst_r = 0.0;
    double worst_margin = 0.0;
    Branch worst_branch = Branch::Left;
    double worst_margin_left = 0.0;   // over r < a
    double worst_margin_right = 0.0;  // over r > a
};

KeyInequalityReport check_key_inequality(const WeightPhaseProfile& prof, const CarlemanParams& params,
                                         const DerivedScales& scales, double E);

// Largest h^2 (mu q0)'/mu' over the grid, to compare against E/8.
double muq0_surrogate(const WeightPhaseProfile& prof, double h);

struct Tau0Failure {
    double h;
    double worst_r;
    double worst_margin;
};

class Tau0Error : public std::runtime_error {
public:
    Tau0Error(const std::string& what, std::vector<Tau0Failure> f)
        : std::runtime_error(what), failures(std::move(f)) {}
    std::vector<Tau0Failure> failures;
};

struct Tau0Result {
    double tau0_star = 0.0;
    bool holds_at_double = false;
    std::vector<Tau0Failure> margins_at_star;
};

// Worst key-inequality margin over all h at this tau0; the entry per h is filled.
bool key_inequality_all(const CarlemanParams& params_template, const ManifoldProfile& profile,
                        const PotentialSpec& potential, const std::vector<double>& h_list,
                        double tau0, const GridSpec& grid, std::vector<Tau0Failure>* per_h = nullptr);

Tau0Result find_admissible_tau0(const CarlemanParams& params_template, const ManifoldProfile& profile,
                                const PotentialSpec& potential, const std::vector<double>& h_list,
                                double tau0_lo, double tau0_hi, const GridSpec& grid = {});

}  // namespace warpres
