#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace warpres {

// Overlap graph of a ball cover. Indices are 1-based; ball 1 is the anchor.
struct BallCoverGraph {
    std::size_t balls = 1;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    double rho = 0.1;
    double lambda_carleman = 1.0;

    void validate() const;
    std::vector<std::vector<std::size_t>> adjacency() const;  // 0-based lists

    static BallCoverGraph path(std::size_t n, double rho = 0.1, double lambda = 1.0);
    static BallCoverGraph star(std::size_t n, double rho = 0.1, double lambda = 1.0);
};

class ChainError : public std::runtime_error {
public:
    ChainError(const std::string& what, std::vector<std::size_t> component)
        : std::runtime_error(what), unreachable(std::move(component)) {}
    std::vector<std::size_t> unreachable;  // 1-based
};

// Shortest anchor-to-target path (breadth first), 1-based.
std::vector<std::size_t> chain_find(const BallCoverGraph& graph, std::size_t target);

struct ChainCoefficients {
    double c1, c2;
};

ChainCoefficients chain_coefficients(double lambda, double rho);

// kappa_2 .. kappa_L with equality in both selection inequalities.
std::vector<double> kappa_schedule(std::size_t L, double c1, double c2, double beta);

// Largest relative violation of the selection inequalities (<= 0 up to rounding when satisfied).
double schedule_violation(const std::vector<double>& kappa, double c1, double c2, double beta);

struct QFactors {
    double log_Q1 = 0.0, log_Q2 = 0.0, log_Q3 = 0.0;
};

QFactors q_factors(const std::vector<double>& kappa, double c1, double c2, double h);

struct GammaReport {
    double gamma = 0.0;
    double headroom = 1.01;
    std::vector<double> gamma_i;                     // per ball, 1-based order
    std::vector<std::vector<std::size_t>> chains;    // per ball
    std::vector<std::vector<double>> schedules;      // per ball
    bool trivial = false;                            // single ball
};

GammaReport gamma_aggregate(const BallCoverGraph& graph, double c1, double c2, double beta,
                            double headroom = 1.01);

}  // namespace warpres
