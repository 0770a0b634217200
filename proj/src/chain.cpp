#include "warpres/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace warpres {

void BallCoverGraph::validate() const {
    if (balls == 0) throw std::invalid_argument("ball cover: need at least one ball");
    if (!(rho > 0.0) || !(lambda_carleman > 0.0)) throw std::invalid_argument("ball cover: rho and lambda must be positive");
    for (const auto& [i, j] : edges)
        if (i < 1 || j < 1 || i > balls || j > balls)
            throw std::invalid_argument("ball cover: edge (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") out of range");
}

std::vector<std::vector<std::size_t>> BallCoverGraph::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(balls);
    for (const auto& [i, j] : edges) {
        if (i == j) continue;
        adj[i - 1].push_back(j - 1);
        adj[j - 1].push_back(i - 1);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

BallCoverGraph BallCoverGraph::path(std::size_t n, double rho, double lambda) {
    BallCoverGraph g;
    g.balls = n;
    g.rho = rho;
    g.lambda_carleman = lambda;
    for (std::size_t i = 1; i < n; ++i) g.edges.emplace_back(i, i + 1);
    return g;
}

BallCoverGraph BallCoverGraph::star(std::size_t n, double rho, double lambda) {
    BallCoverGraph g;
    g.balls = n;
    g.rho = rho;
    g.lambda_carleman = lambda;
    for (std::size_t i = 2; i <= n; ++i) g.edges.emplace_back(1, i);
    return g;
}

std::vector<std::size_t> chain_find(const BallCoverGraph& graph, std::size_t target) {
    graph.validate();
    if (target < 1 || target > graph.balls) throw std::invalid_argument("chain_find: target out of range");
    const auto adj = graph.adjacency();
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent(graph.balls, none);
    std::deque<std::size_t> queue{0};
    parent[0] = 0;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w : adj[v])
            if (parent[w] == none) {
                parent[w] = v;
                queue.push_back(w);
            }
    }
    if (parent[target - 1] == none) {
        // Collect the component of the target for the error report.
        std::vector<std::size_t> comp;
        std::vector<char> seen(graph.balls, 0);
        std::deque<std::size_t> q{target - 1};
        seen[target - 1] = 1;
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop_front();
            comp.push_back(v + 1);
            for (std::size_t w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    q.push_back(w);
                }
        }
        std::sort(comp.begin(), comp.end());
        std::string list;
        for (std::size_t k = 0; k < comp.size() && k < 20; ++k) list += (k ? "," : "") + std::to_string(comp[k]);
        if (comp.size() > 20) list += ",...";
        throw ChainError("ball cover graph is disconnected: component {" + list + "} is unreachable from ball 1",
                         comp);
    }
    std::vector<std::size_t> path;
    for (std::size_t v = target - 1;; v = parent[v]) {
        path.push_back(v + 1);
        if (v == 0) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

ChainCoefficients chain_coefficients(double lambda, double rho) {
    if (!(lambda > 0.0) || !(rho > 0.0)) throw std::invalid_argument("chain coefficients: lambda and rho must be positive");
    const double x = lambda * rho;
    // c1 = e^{-x/2} - e^{-3x}, c2 = e^{-3x} - e^{-4x}, written to avoid cancellation.
    return {-std::exp(-0.5 * x) * std::expm1(-2.5 * x), -std::exp(-3.0 * x) * std::expm1(-x)};
}

std::vector<double> kappa_schedule(std::size_t L, double c1, double c2, double beta) {
    if (L < 2) throw std::invalid_argument("kappa_schedule: chain length must be >= 2");
    if (!(c1 > 0.0) || !(c2 > 0.0) || !(beta > 0.0)) throw std::invalid_argument("kappa_schedule: inputs must be positive");
    // kappa[l - 2] holds kappa_l.
    std::vector<double> kappa(L - 1);
    double tail = 0.0;  // sum_{nu > l} c1 / kappa_nu
    for (std::size_t l = L; l >= 2; --l) {
        kappa[l - 2] = c2 / (beta + tail);
        tail += c1 / kappa[l - 2];
    }
    return kappa;
}

double schedule_violation(const std::vector<double>& kappa, double c1, double c2, double beta) {
    double worst = -std::numeric_limits<double>::infinity();
    double tail = 0.0;
    for (std::size_t k = kappa.size(); k-- > 0;) {
        const double need = beta + tail;
        worst = std::max(worst, (need - c2 / kappa[k]) / need);
        tail += c1 / kappa[k];
    }
    return worst;
}

namespace {

double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

QFactors q_factors(const std::vector<double>& kappa, double c1, double c2, double h) {
    if (kappa.empty()) throw std::invalid_argument("q_factors: empty schedule");
    const double s = 2.0 * std::pow(h, -4.0 / 3.0);
    const std::size_t n = kappa.size();  // L - 1
    // suffix[k] = sum_{j >= k} c1 / kappa[j]
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + c1 / kappa[k];
    QFactors q;
    std::vector<double> t1;
    for (std::size_t k = 0; k < n; ++k) t1.push_back(s * suffix[k]);
    q.log_Q1 = log_sum_exp(t1);
    std::vector<double> t2{-s * c2 / kappa[n - 1]};
    for (std::size_t k = 0; k + 1 < n; ++k) t2.push_back(-s * c2 / kappa[k] + s * suffix[k + 1]);
    q.log_Q2 = log_sum_exp(t2);
    q.log_Q3 = s * suffix[0];
    return q;
}

GammaReport gamma_aggregate(const BallCoverGraph& graph, double c1, double c2, double beta, double headroom) {
    graph.validate();
    GammaReport rep;
    rep.headroom = headroom;
    rep.trivial = graph.balls == 1;
    double gmax = 0.0;
    for (std::size_t t = 1; t <= graph.balls; ++t) {
        auto chain = chain_find(graph, t);
        double gi = 0.0;
        std::vector<double> sched;
        if (chain.size() >= 2) {
            sched = kappa_schedule(chain.size(), c1, c2, beta);
            for (double k : sched) gi += c1 / k;
        }
        rep.gamma_i.push_back(gi);
        rep.chains.push_back(std::move(chain));
        rep.schedules.push_back(std::move(sched));
        gmax = std::max(gmax, gi);
    }
    rep.gamma = headroom * gmax;
    return rep;
}

}  // namespace warpres
