#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "warpres/geometry.hpp"
#include "warpres/phaseweight.hpp"
#include "warpres/tridiag.hpp"

namespace warpres {

double b_selection(double c_sharp, double bound_const);

// g^{ij} = f^{-2} omega^{ij} + C f^{-3} S1(r), d_r g^{ij} = -2 f' f^{-3} omega^{ij} + C f' f^{-4} S2(r),
// with S1, S2 symmetric of spectral norm at most 1.
struct MetricPerturbation {
    using Direction = std::function<Eigen::MatrixXd(double)>;

    Eigen::MatrixXd omega_inv;
    Direction residual_direction;    // empty means zero
    Direction derivative_direction;  // empty means zero
    double bound_const = 1.0;

    std::size_t dim() const { return static_cast<std::size_t>(omega_inv.rows()); }
    void validate(double c_sharp, const std::vector<double>& r_samples) const;

    static MetricPerturbation exact(const Eigen::MatrixXd& omega_inv, double bound_const);
    static MetricPerturbation constant(const Eigen::MatrixXd& omega_inv, double bound_const,
                                       const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);
};

// Random symmetric matrix with spectral norm exactly 1.
Eigen::MatrixXd random_unit_symmetric(std::size_t d, std::uint64_t seed);
// Random SPD matrix with smallest eigenvalue c_sharp.
Eigen::MatrixXd random_omega(std::size_t d, double c_sharp, std::uint64_t seed);

struct PhiCheckResult {
    double max_eigenvalue = 0.0;  // of the scaled, symmetrized Phi
    bool holds = false;           // max_eigenvalue <= 0
    bool strict_holds = false;    // max_eigenvalue < -tol
    double worst_r = 0.0;
    Branch worst_branch = Branch::Left;
    double max_left = -1e300;
    double max_right = -1e300;
    std::size_t samples = 0;
};

// Phi = mu d_r g + mu' g, divided by f'/f^2 (r < a) or mu f'/f^3 (r > a).
// Both one-sided limits at a are always included.
PhiCheckResult phi_matrix_check(const MetricPerturbation& pert, const WeightPhase& wp,
                                const std::vector<double>& r_samples, double tol = 1e-12);

// Per-mode samples of the half-density function on a uniform grid.
struct TestFunction {
    std::vector<double> r;
    std::vector<std::size_t> modes;
    std::vector<std::vector<cplx>> values;  // values[m][i] for mode modes[m]
    bool boundary_zero = true;              // v = d_r v = 0 at r.front()

    double dr() const { return r[1] - r[0]; }
    void validate() const;
};

// Analytic description of a random test function, so the same function can be
// sampled at several resolutions.
struct TestFunctionSpec {
    double r_start = 0.0, length = 1.0;
    struct Wave {
        std::size_t mode;
        cplx amplitude;
        double omega;
    };
    std::vector<Wave> waves;
    std::vector<std::size_t> modes;

    TestFunction sample(std::size_t n_points) const;
};

struct RandomTestOptions {
    std::size_t max_mode = 2;
    std::size_t waves_per_mode = 4;
    double length_min = 2.0, length_max = 6.0;
    double omega_factor = 2.0;  // |omega| <= omega_factor sqrt(E) / h
};

TestFunctionSpec random_test_function(std::uint64_t seed, double r_start, double h, double E,
                                      const RandomTestOptions& opts = {});

// F(r) at every node, summed over modes.
std::vector<double> F_values(const WeightPhase& wp, const TestFunction& v, const PotentialSpec& potential);

struct FIdentityResult {
    double max_residual = 0.0;  // max |F'_fd - F'_identity|
    double max_derivative = 0.0;
    std::size_t points = 0;
};

// Compares the centered difference of F with the expanded derivative identity,
// with the conjugated operator applied by explicit conjugation of the stencil.
FIdentityResult F_identity_check(const WeightPhase& wp, const TestFunction& v, const PotentialSpec& potential,
                                 int sign = 1);

// Conjugated operator e^{phi/h} P e^{-phi/h} applied to one mode.
std::vector<cplx> apply_conjugated(const WeightPhase& wp, const PotentialSpec& potential, const TestFunction& v,
                                   std::size_t m, const std::vector<double>& phi, int sign);

// Weighted L2 norms: sqrt(sum dr |x_i|^2 exp(2 log_w_i)) with trapezoidal ends.
double weighted_norm_log(const std::vector<double>& r, const std::vector<cplx>& x, const std::vector<double>& log_w);
double weighted_norm_direct(const std::vector<double>& r, const std::vector<cplx>& x,
                            const std::vector<double>& log_w, bool* clamped = nullptr);

struct CarlemanRatio {
    double log_lhs = 0.0;
    double log_rhs_resolvent = 0.0;
    double log_rhs_epsilon = 0.0;
    double best_C = 0.0;  // lhs / (rhs with C = 1)
    bool epsilon_dominates = false;
};

CarlemanRatio carleman_ratio(const TestFunction& u, const ManifoldProfile& profile, const PotentialSpec& potential,
                             const CarlemanParams& params, const DerivedScales& scales, const WeightPhase& wp,
                             int sign = 1);

// Eigenvector of the discrete self-adjoint mode-0 operator (Dirichlet ends) on [r_lo, r_hi],
// for the eigenvalue closest to E_target. With wp the vector is computed for the
// conjugated operator and mapped back, which keeps e^{phi/h} times the residual small.
struct Quasimode {
    TestFunction u;
    double energy = 0.0;
};

Quasimode build_quasimode(const ManifoldProfile& profile, const PotentialSpec& potential, double h, double r_lo,
                          double r_hi, std::size_t n_points, double E_target, const WeightPhase* wp = nullptr);

struct CarlemanTrial {
    std::uint64_t seed = 0;
    double h = 0.0;
    double length = 0.0;
    std::size_t n_points = 0;
    CarlemanRatio ratio;
    CarlemanRatio ratio_refined;  // same function on the doubled grid
};

struct CarlemanSuite {
    std::vector<CarlemanTrial> trials;
    double max_best_C = 0.0;
    double max_best_C_refined = 0.0;
};

struct CarlemanSuiteOptions {
    std::size_t trials_per_h = 50;
    std::size_t n_points = 4000;
    unsigned workers = 1;
    RandomTestOptions random;
};

CarlemanSuite carleman_suite(const ManifoldProfile& profile, const PotentialSpec& potential,
                             const CarlemanParams& params_template, const std::vector<double>& h_list,
                             std::uint64_t seed, const CarlemanSuiteOptions& opts = {});

}  // namespace warpres
