#include "warpres/tridiag.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "warpres/rng.hpp"

namespace warpres {

void Tridiag::validate() const {
    const std::size_t n = diag.size();
    if (n == 0) throw std::invalid_argument("tridiagonal operator is empty");
    if (sub.size() + 1 != n || sup.size() + 1 != n)
        throw std::invalid_argument("tridiagonal band sizes inconsistent");
}

void Tridiag::apply(const std::vector<cplx>& x, std::vector<cplx>& y) const {
    const std::size_t n = size();
    y.assign(n, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        cplx s = diag[i] * x[i];
        if (i > 0) s += sub[i - 1] * x[i - 1];
        if (i + 1 < n) s += sup[i] * x[i + 1];
        y[i] = s;
    }
}

double Tridiag::norm_inf() const {
    const std::size_t n = size();
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = std::abs(diag[i]);
        if (i > 0) s += std::abs(sub[i - 1]);
        if (i + 1 < n) s += std::abs(sup[i]);
        m = std::max(m, s);
    }
    return m;
}

double Tridiag::norm_fro() const {
    double s = 0.0;
    for (const auto& v : diag) s += std::norm(v);
    for (const auto& v : sub) s += std::norm(v);
    for (const auto& v : sup) s += std::norm(v);
    return std::sqrt(s);
}

TridiagLU::TridiagLU(const Tridiag& A) {
    A.validate();
    const std::size_t n = A.size();
    dl_ = A.sub;
    d_ = A.diag;
    du_ = A.sup;
    du2_.assign(n > 2 ? n - 2 : 0, cplx(0.0));
    swapped_.assign(n > 0 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            if (d_[i] != cplx(0.0)) {
                const cplx fact = dl_[i] / d_[i];
                dl_[i] = fact;
                d_[i + 1] -= fact * du_[i];
            }
        } else {
            const cplx fact = d_[i] / dl_[i];
            d_[i] = dl_[i];
            dl_[i] = fact;
            const cplx temp = du_[i];
            du_[i] = d_[i + 1];
            d_[i + 1] = temp - fact * d_[i + 1];
            if (i + 2 < n) {
                du2_[i] = du_[i + 1];
                du_[i + 1] = -fact * du_[i + 1];
            }
            swapped_[i] = 1;
        }
    }
    for (const auto& v : d_)
        if (v == cplx(0.0) || !std::isfinite(std::abs(v))) singular_ = true;
}

void TridiagLU::solve(std::vector<cplx>& b) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swapped_[i]) {
            b[i + 1] -= dl_[i] * b[i];
        } else {
            const cplx temp = b[i];
            b[i] = b[i + 1];
            b[i + 1] = temp - dl_[i] * b[i];
        }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (std::size_t k = n > 2 ? n - 2 : 0; k-- > 0;) b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
}

void TridiagLU::solve_adjoint(std::vector<cplx>& b) const {
    const std::size_t n = d_.size();
    b[0] /= std::conj(d_[0]);
    if (n > 1) b[1] = (b[1] - std::conj(du_[0]) * b[0]) / std::conj(d_[1]);
    for (std::size_t i = 2; i < n; ++i)
        b[i] = (b[i] - std::conj(du_[i - 1]) * b[i - 1] - std::conj(du2_[i - 2]) * b[i - 2]) / std::conj(d_[i]);
    for (std::size_t i = n - 1; i-- > 0;) {
        if (!swapped_[i]) {
            b[i] -= std::conj(dl_[i]) * b[i + 1];
        } else {
            const cplx temp = b[i + 1];
            b[i + 1] = b[i] - std::conj(dl_[i]) * temp;
            b[i] = temp;
        }
    }
}

std::vector<cplx> seeded_unit_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<cplx> x(n);
    double s = 0.0;
    for (auto& v : x) {
        v = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        s += std::norm(v);
    }
    const double inv = 1.0 / std::sqrt(s);
    for (auto& v : x) v *= inv;
    return x;
}

namespace {

double sq_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

}  // namespace

SigmaResult sigma_min_tridiag(const Tridiag& A, const SigmaOptions& opts) {
    A.validate();
    const std::size_t n = A.size();
    SigmaResult res;
    if (n == 1) {
        res.sigma = std::abs(A.diag[0]);
        res.converged = true;
        return res;
    }
    const TridiagLU lu(A);
    auto dense = [&]() {
        if (n > opts.dense_fallback_max)
            throw std::runtime_error("sigma_min: banded path failed and N exceeds the dense fallback limit");
        res.sigma = dense_sigma_min(A);
        res.used_dense = true;
        res.converged = true;
        return res;
    };
    if (lu.singular()) return dense();

    double best_mu = 0.0;
    std::vector<cplx> x, y;
    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        x = seeded_unit_vector(n, mix_seed(opts.seed, static_cast<std::uint64_t>(attempt)));
        double mu_prev = 0.0;
        bool done = false;
        for (int it = 0; it < opts.max_iter; ++it) {
            y = x;
            lu.solve_adjoint(y);
            const double mu = sq_norm(y);
            x = y;
            lu.solve(x);
            const double nx = std::sqrt(sq_norm(x));
            if (!std::isfinite(mu) || !std::isfinite(nx) || nx == 0.0) return dense();
            const double inv = 1.0 / nx;
            for (auto& v : x) v *= inv;
            ++res.iterations;
            best_mu = std::max(best_mu, mu);
            if (it > 0 && std::abs(mu - mu_prev) <= opts.tol * mu) {
                done = true;
                break;
            }
            mu_prev = mu;
        }
        if (done) {
            res.converged = true;
            res.restarts = attempt;
            break;
        }
        res.restarts = attempt + 1;
    }
    if (!res.converged && n <= opts.dense_fallback_max) return dense();
    res.sigma = 1.0 / std::sqrt(best_mu);
    return res;
}

std::vector<double> dense_singular_values(const Tridiag& A) {
    A.validate();
    const lapack_int n = static_cast<lapack_int>(A.size());
    std::vector<lapack_complex_double> M(static_cast<std::size_t>(n) * n);
    auto at = [&](lapack_int i, lapack_int j) -> lapack_complex_double& { return M[static_cast<std::size_t>(j) * n + i]; };
    for (auto& v : M) v = lapack_make_complex_double(0.0, 0.0);
    for (lapack_int i = 0; i < n; ++i) {
        at(i, i) = lapack_make_complex_double(A.diag[i].real(), A.diag[i].imag());
        if (i + 1 < n) {
            at(i + 1, i) = lapack_make_complex_double(A.sub[i].real(), A.sub[i].imag());
            at(i, i + 1) = lapack_make_complex_double(A.sup[i].real(), A.sup[i].imag());
        }
    }
    std::vector<double> s(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', n, n, M.data(), n, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw std::runtime_error("dense SVD did not converge");
    return s;
}

double dense_sigma_min(const Tridiag& A) {
    const auto s = dense_singular_values(A);
    return s.back();
}

double backward_error(const Tridiag& A, const std::vector<cplx>& x, const std::vector<cplx>& b) {
    std::vector<cplx> r;
    A.apply(x, r);
    double rn = 0.0, xn = 0.0, bn = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        rn = std::max(rn, std::abs(r[i] - b[i]));
        xn = std::max(xn, std::abs(x[i]));
        bn = std::max(bn, std::abs(b[i]));
    }
    return rn / (A.norm_inf() * xn + bn);
}

std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    std::size_t count = 0;
    double q = 1.0;
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double off = i > 0 ? e[i - 1] * e[i - 1] : 0.0;
        q = d[i] - x - (i > 0 ? off / q : 0.0);
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

double sturm_eigenvalue(const std::vector<double>& d, const std::vector<double>& e, std::size_t j) {
    if (j >= d.size()) throw std::out_of_range("sturm_eigenvalue: index beyond size");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        if (i < e.size()) r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(d, e, mid) > j)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace warpres
