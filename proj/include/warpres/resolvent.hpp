#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "warpres/fit.hpp"
#include "warpres/geometry.hpp"
#include "warpres/phaseweight.hpp"
#include "warpres/tridiag.hpp"

namespace warpres {

enum class FarBoundary { Transparent, Dirichlet };

struct ResolventOptions {
    double ppw = 16.0;              // points per local wavelength 2 pi h / sqrt(E + |V|max)
    double r_inner = 0.0;           // Dirichlet wall; <= 0 means profile.r0
    double r_max = 41.0;            // far end of the box
    FarBoundary far = FarBoundary::Transparent;
    double weight_s = 1.0;          // exponent in chi_s
    bool derived_s = false;         // use s = (1 + eps_log)/2 instead of weight_s
    double mode_margin = 2.0;
    double cutoff_radius = 0.0;     // <= 0 means r_inner
    double dr_override = 0.0;       // > 0 freezes the grid spacing
    std::size_t max_points = 4000000;
    std::size_t max_modes = 200000;
    bool check_rmax = true;
    bool check_excluded_mode = true;
    unsigned workers = 1;
    std::uint64_t seed = 1;
    SigmaOptions sigma;
};

struct RadialGrid {
    double r_lo = 0.0, r_hi = 0.0, dr = 0.0;
    std::vector<double> r;  // interior nodes
};

RadialGrid make_radial_grid(double r_lo, double r_hi, double dr_target);
double grid_spacing(double h, double E, double v_max, double ppw);

// One angular mode of -h^2 d^2/dr^2 + h^2 lambda_j f^{-2} + h^2 q0 + V - E + i sign eps.
struct ModeOperator {
    std::vector<double> grid;
    std::vector<cplx> diag;      // imaginary part exactly sign*eps
    std::vector<cplx> offdiag;   // equal sub and super diagonals
    cplx far_closure{0.0, 0.0};  // added to the last diagonal entry
    std::vector<double> weight;  // chi_s at the nodes
    double h = 0.0, E = 0.0, epsilon_shift = 0.0, lambda = 0.0, dr = 0.0;
    int sign = 1;
    std::size_t mode = 0;
    bool coarse_warning = false;

    Tridiag assemble(bool weighted) const;
};

ModeOperator build_mode_operator(const ManifoldProfile& profile, const PotentialSpec& potential,
                                 const CarlemanParams& params, std::size_t mode, const RadialGrid& grid,
                                 int sign, FarBoundary far = FarBoundary::Transparent, double weight_s = 1.0,
                                 double weight_anchor = 0.0);

// Root |rho| < 1 of rho + 1/rho = 2 + (w - E + i sign eps) dr^2 / h^2.
cplx transparent_root(double w_minus_E, double eps, int sign, double dr, double h);

SigmaResult sigma_min(const ModeOperator& op, bool weighted, const SigmaOptions& opts = {});

struct ModeSigma {
    std::size_t mode;
    double lambda;
    double sigma;
    bool converged;
};

struct CutoffNorm {
    double norm = 0.0;
    std::size_t dominant_mode = 0;
    std::size_t modes_used = 0;
    std::size_t n_points = 0;
    std::vector<ModeSigma> per_mode;
    double excluded_mode_norm = 0.0;
    double rmax_change = 0.0;  // relative change of the dominant mode when R_max doubles
    std::vector<std::string> flags;
};

std::size_t count_modes(const ManifoldProfile& profile, const CarlemanParams& params, double r_cut,
                        double margin, std::size_t cap);

CutoffNorm cutoff_resolvent_norm(const ManifoldProfile& profile, const PotentialSpec& potential,
                                 const CarlemanParams& params, const ResolventOptions& opts, int sign = 1);

// Dominant-mode norm with points per wavelength multiplied by factor; relative change.
double grid_convergence_change(const ManifoldProfile& profile, const PotentialSpec& potential,
                               const CarlemanParams& params, const ResolventOptions& opts, std::size_t mode,
                               double factor = 2.0, int sign = 1);

enum class EnergyMode { Fixed, Trapped };

struct Scenario {
    std::string name = "scenario";
    ManifoldProfile profile;
    PotentialSpec potential;
    CarlemanParams params;
    ResolventOptions resolvent;
    EnergyMode energy = EnergyMode::Fixed;
    double trap_radius = 0.0;  // Dirichlet truncation for the trapped level search; <= 0: support_end
    std::vector<double> h_list;
    std::uint64_t seed = 1;
};

struct SweepEntry {
    double h_nominal = 0.0;
    double h = 0.0;
    double E = 0.0;
    double norm = 0.0;
    std::size_t dominant_mode = 0;
    std::size_t n_points = 0;
    std::size_t modes_used = 0;
    double time_ms = 0.0;
    double rmax_change = 0.0;
    double excluded_mode_norm = 0.0;
    std::vector<ModeSigma> per_mode;
    std::vector<std::string> flags;
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    int sign = 1;

    std::vector<double> h() const;
    std::vector<double> log_norm() const;
};

struct TrappedLevel {
    double h = 0.0;
    double E = 0.0;
    std::size_t level = 0;
    double spacing = 0.0;
    double log_norm_mode0 = 0.0;
};

// Tune h onto the well level closest below E, then maximize the mode-0 norm in E.
TrappedLevel find_trapped_level(const Scenario& sc, double h_nominal, int sign = 1);

SweepResult h_sweep(const Scenario& sc, const std::vector<double>& h_list, int sign = 1);

struct BoundCheck {
    bool consistent = false;
    double implied_C = 0.0;
    std::vector<double> per_h;  // log norm / (h^{-p} (log 1/h)^q), in sweep order
    double p = 0.0, q = 0.0;
};

BoundCheck bound_check(const SweepResult& sweep, const ManifoldProfile& profile, const PotentialSpec& potential);
BoundCheck bound_check(const SweepResult& sweep, double p, double q);

ExponentFit fit_sweep(const SweepResult& sweep, const FitModel& model);

// Smallest C with log norm <= log C + C h^{-p} (log 1/h)^q at every h.
double dominating_constant(const SweepResult& sweep, double p, double q);

}  // namespace warpres
