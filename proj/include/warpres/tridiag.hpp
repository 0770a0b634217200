#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace warpres {

using cplx = std::complex<double>;

// sub[i] = A(i+1, i), sup[i] = A(i, i+1).
struct Tridiag {
    std::vector<cplx> sub, diag, sup;

    std::size_t size() const { return diag.size(); }
    void validate() const;
    void apply(const std::vector<cplx>& x, std::vector<cplx>& y) const;
    double norm_inf() const;
    double norm_fro() const;
};

// LU with partial pivoting (row interchanges), the gttrf layout:
// U has two superdiagonals, L is unit lower bidiagonal up to the swaps.
class TridiagLU {
public:
    explicit TridiagLU(const Tridiag& A);

    bool singular() const { return singular_; }
    void solve(std::vector<cplx>& b) const;          // A x = b, in place
    void solve_adjoint(std::vector<cplx>& b) const;  // A^H x = b, in place

private:
    std::vector<cplx> dl_, d_, du_, du2_;
    std::vector<std::uint8_t> swapped_;
    bool singular_ = false;
};

struct SigmaOptions {
    double tol = 1e-13;       // relative change of successive Rayleigh quotients
    int max_iter = 20000;
    int max_restarts = 3;
    std::uint64_t seed = 1;
    std::size_t dense_fallback_max = 4000;
};

struct SigmaResult {
    double sigma = 0.0;
    int iterations = 0;
    int restarts = 0;
    bool converged = false;
    bool used_dense = false;
};

// Smallest singular value by inverse iteration on A^H A.
SigmaResult sigma_min_tridiag(const Tridiag& A, const SigmaOptions& opts = {});

// Dense reference: all singular values (descending) via LAPACK gesdd.
std::vector<double> dense_singular_values(const Tridiag& A);
double dense_sigma_min(const Tridiag& A);

// Normwise backward error ||Ax-b|| / (||A|| ||x|| + ||b||) in the infinity norm.
double backward_error(const Tridiag& A, const std::vector<cplx>& x, const std::vector<cplx>& b);

// Deterministic unit-norm complex start vector.
std::vector<cplx> seeded_unit_vector(std::size_t n, std::uint64_t seed);

// Real symmetric tridiagonal helpers (Sturm sequences).
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x);
// The j-th smallest eigenvalue (0-based) by bisection.
double sturm_eigenvalue(const std::vector<double>& d, const std::vector<double>& e, std::size_t j);

}  // namespace warpres
