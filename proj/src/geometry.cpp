#include "warpres/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace warpres {

namespace {

bool is_one(double k) { return std::abs(k - 1.0) < 1e-12; }

}  // namespace

WarpFamily WarpFamily::polynomial(double k) {
    WarpFamily w{WarpKind::Polynomial, k};
    w.validate();
    return w;
}

WarpFamily WarpFamily::exponential(double alpha) {
    WarpFamily w{WarpKind::Exponential, alpha};
    w.validate();
    return w;
}

void WarpFamily::validate() const {
    if (kind == WarpKind::Polynomial) {
        if (!(param > 0.0)) throw std::invalid_argument("polynomial warp needs k > 0");
    } else {
        if (!(param > 0.0 && param <= 1.0))
            throw std::invalid_argument("exponential warp needs 0 < alpha <= 1");
    }
}

std::string WarpFamily::describe() const {
    std::ostringstream os;
    if (kind == WarpKind::Polynomial)
        os << "r^" << param;
    else
        os << "exp(r^" << param << ")";
    return os.str();
}

WarpLog warp_log_eval(const WarpFamily& warp, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("warp_eval: r must be positive");
    const double x = warp.param;
    if (warp.kind == WarpKind::Polynomial) {
        return {x * std::log(r), x / r, x * (x - 1.0) / (r * r)};
    }
    const double ra = std::pow(r, x);
    const double g1 = x * ra / r;
    return {ra, g1, x * (x - 1.0) * ra / (r * r) + g1 * g1};
}

WarpValue warp_eval(const WarpFamily& warp, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("warp_eval: r must be positive");
    const double x = warp.param;
    if (warp.kind == WarpKind::Polynomial) {
        if (x == 1.0) return {r, 1.0, 0.0};
        if (x == 2.0) return {r * r, 2.0 * r, 2.0};
        const double f = std::pow(r, x);
        return {f, x * f / r, x * (x - 1.0) * f / (r * r)};
    }
    const WarpLog w = warp_log_eval(warp, r);
    const double f = std::exp(w.log_f);
    return {f, w.g1 * f, w.g2 * f};
}

void ManifoldProfile::validate() const {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    warp.validate();
    if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
    if (!(r1 >= r0)) throw std::invalid_argument("r1 must be >= r0");
    if (!(c_sharp > 0.0)) throw std::invalid_argument("c_sharp must be positive");
    for (std::size_t i = 0; i < angular_spectrum.size(); ++i) {
        if (angular_spectrum[i] < 0.0) throw std::invalid_argument("negative angular eigenvalue");
        if (i > 0 && angular_spectrum[i] < angular_spectrum[i - 1])
            throw std::invalid_argument("angular spectrum must be nondecreasing");
    }
}

double ManifoldProfile::lambda(std::size_t j) const {
    if (angular_spectrum.empty()) {
        const double l = static_cast<double>(j);
        return l * (l + n - 2);
    }
    if (j >= angular_spectrum.size()) throw std::out_of_range("mode index beyond angular spectrum");
    return angular_spectrum[j];
}

std::size_t ManifoldProfile::spectrum_size() const {
    return angular_spectrum.empty() ? std::numeric_limits<std::size_t>::max()
                                    : angular_spectrum.size();
}

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::compact(std::vector<Segment> segs) {
    PotentialSpec v;
    v.kind = PotentialKind::CompactSupport;
    v.segments = std::move(segs);
    for (const auto& s : v.segments) v.support_end = std::max(v.support_end, s.hi);
    v.validate();
    return v;
}

PotentialSpec PotentialSpec::decaying(std::vector<Segment> segs, double delta, double envelope_const,
                                      const WarpFamily& warp, double tail_amplitude,
                                      double tail_start) {
    PotentialSpec v;
    v.kind = PotentialKind::Decaying;
    v.segments = std::move(segs);
    v.delta = delta;
    v.envelope_const = envelope_const;
    v.warp = warp;
    v.tail_amplitude = tail_amplitude;
    v.tail_start = tail_start;
    for (const auto& s : v.segments) v.support_end = std::max(v.support_end, s.hi);
    v.validate();
    return v;
}

void PotentialSpec::validate() const {
    for (const auto& s : segments) {
        if (!(s.hi > s.lo)) throw std::invalid_argument("potential segment with hi <= lo");
        if (!std::isfinite(s.value)) throw std::invalid_argument("potential value not finite");
    }
    if (kind == PotentialKind::Decaying) {
        if (!(delta > 1.0)) throw std::invalid_argument("decaying potential needs delta > 1");
        if (!(envelope_const > 0.0)) throw std::invalid_argument("envelope_const must be positive");
    } else {
        for (const auto& s : segments)
            if (s.hi > support_end + 1e-14)
                throw std::invalid_argument("compact potential segment beyond support_end");
    }
}

double PotentialSpec::operator()(double r) const {
    double v = 0.0;
    for (const auto& s : segments)
        if (r >= s.lo && r < s.hi) v += s.value;
    if (kind == PotentialKind::Decaying && tail_amplitude != 0.0 && r >= tail_start) {
        const WarpLog w = warp_log_eval(warp, r);
        v += tail_amplitude * std::exp(-delta * std::log(r) - 2.0 * w.log_f);
    }
    return v;
}

double PotentialSpec::max_abs() const {
    double m = 0.0;
    // Segments may overlap; sample every breakpoint to catch sums.
    std::vector<double> pts;
    for (const auto& s : segments) {
        pts.push_back(s.lo);
        pts.push_back(0.5 * (s.lo + s.hi));
    }
    for (double p : pts) m = std::max(m, std::abs((*this)(p)));
    if (kind == PotentialKind::Decaying && tail_amplitude != 0.0) {
        const double r = std::max(tail_start, 1e-12);
        m = std::max(m, std::abs((*this)(r)));
    }
    return m;
}

double PotentialSpec::envelope_ratio(const std::vector<double>& r_samples) const {
    double worst = 0.0;
    const WarpFamily& w = warp;
    for (double r : r_samples) {
        const double v = std::abs((*this)(r));
        if (v == 0.0) continue;
        const WarpLog wl = warp_log_eval(w, r);
        const double lr = std::log(v) + delta * std::log(r) + 2.0 * wl.log_f - std::log(envelope_const);
        worst = std::max(worst, std::exp(lr));
    }
    return worst;
}

double q0_eval(const ManifoldProfile& profile, double r) {
    const WarpLog w = warp_log_eval(profile.warp, r);
    const double n = profile.n;
    return (n - 1.0) * (n - 3.0) / 4.0 * w.g1 * w.g1 + (n - 1.0) / 2.0 * w.g2;
}

double q0_closed_form(const ManifoldProfile& profile, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("q0: r must be positive");
    const double n = profile.n;
    const double x = profile.warp.param;
    if (profile.warp.kind == WarpKind::Polynomial) {
        return x * (n - 1.0) * (x * n - x - 2.0) / (4.0 * r * r);
    }
    return x * (n - 1.0) * (x * (n - 1.0) + 2.0 * (x - 1.0) * std::pow(r, -x)) *
           std::pow(r, 2.0 * x - 2.0) / 4.0;
}

double q0_prime(const ManifoldProfile& profile, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("q0: r must be positive");
    const double n = profile.n;
    const double x = profile.warp.param;
    if (profile.warp.kind == WarpKind::Polynomial) {
        return -x * (n - 1.0) * (x * n - x - 2.0) / (2.0 * r * r * r);
    }
    const double c2 = (n - 1.0) * (n - 1.0) * x * x / 4.0;
    const double c1 = (n - 1.0) * x * (x - 1.0) / 2.0;
    return c2 * (2.0 * x - 2.0) * std::pow(r, 2.0 * x - 3.0) +
           c1 * (x - 2.0) * std::pow(r, x - 3.0);
}

Q0Classification q0_condition_classify(const ManifoldProfile& profile) {
    if (profile.warp.kind == WarpKind::Exponential) return {true, Q0Reason::ExponentialWarp};
    const double k = profile.warp.param;
    const double coeff = k * (profile.n - 1.0) * (k * profile.n - k - 2.0);
    // q0 = coeff/(4r^2): bounded above; q0' = -coeff/(2r^3) must be <= C r^{-1-2k}.
    if (coeff >= 0.0) return {true, Q0Reason::NonincreasingQ0};
    if (k <= 1.0) return {true, Q0Reason::SlowGrowth};
    return {false, Q0Reason::DimensionTwoMidK};
}

std::string to_string(Q0Reason reason) {
    switch (reason) {
        case Q0Reason::ExponentialWarp: return "exponential_warp";
        case Q0Reason::NonincreasingQ0: return "q0_nonincreasing";
        case Q0Reason::SlowGrowth: return "k_at_most_one";
        case Q0Reason::DimensionTwoMidK: return "n2_k_between_1_and_2";
    }
    return "unknown";
}

double m0_compute(const WarpFamily& warp, const PotentialSpec& potential) {
    warp.validate();
    if (potential.compact_support()) {
        return warp.kind == WarpKind::Polynomial ? 2.0 / (3.0 * warp.param) : 1.0;
    }
    if (!(potential.delta > 1.0)) throw std::invalid_argument("m0: delta must exceed 1");
    const double tail = 1.0 / (potential.delta - 1.0);
    if (warp.kind == WarpKind::Polynomial) return std::max(2.0 / (3.0 * warp.param), tail);
    return tail;
}

BoundExponent predicted_bound_exponent(const ManifoldProfile& profile, const PotentialSpec& potential) {
    const WarpFamily& w = profile.warp;
    w.validate();
    const bool compact = potential.compact_support();
    if (!compact && !(potential.delta > 1.0))
        throw std::invalid_argument("predicted exponent: delta must exceed 1");
    if (w.kind == WarpKind::Exponential) {
        if (!compact && !(potential.delta > 0.75 * w.param + 1.0)) {
            std::ostringstream os;
            os << "predicted exponent: exponential warp needs delta > 3 alpha/4 + 1 = "
               << 0.75 * w.param + 1.0 << ", got " << potential.delta;
            throw std::invalid_argument(os.str());
        }
        return {4.0 / 3.0, 0.0};
    }
    const double k = w.param;
    if (is_one(k)) return {4.0 / 3.0, 1.0};
    if (k > 1.0) return {4.0 / 3.0, 0.0};
    if (compact) return {2.0 * (k + 1.0) / (3.0 * k), 0.0};
    const double m0 = m0_compute(w, potential);
    return {4.0 / 3.0 + m0 * (1.0 - k), (1.0 - k) / (potential.delta - 1.0)};
}

double compute_r1(const WarpFamily& warp, double b, double r0, const PotentialSpec& potential,
                  double anchor) {
    if (!(b > 0.0)) throw std::invalid_argument("compute_r1: b must be positive");
    double r;
    if (warp.kind == WarpKind::Polynomial) {
        r = std::pow(2.0 * b, 1.0 / warp.param);
    } else {
        const double l = std::log(2.0 * b);
        r = l > 0.0 ? std::pow(l, 1.0 / warp.param) : 0.0;
    }
    r = std::max(r, r0);
    if (potential.compact_support()) r = std::max(r, potential.support_end);
    if (anchor > 0.0) r = std::ceil(r / anchor - 1e-12) * anchor;
    return r;
}

double certify_growth_constant(const WarpFamily& warp, const std::vector<double>& r_samples) {
    double c = std::numeric_limits<double>::infinity();
    for (double r : r_samples) c = std::min(c, r * warp_log_eval(warp, r).g1);
    return c;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0 && hi > lo) || n < 2) throw std::invalid_argument("log_grid: bad range");
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace warpres
