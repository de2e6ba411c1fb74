#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library, so the tests compare against independent arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

/// argmin of f over [lo, hi] by repeated dense-grid search, shrinking the
/// window around the best node until it is narrower than `tol`.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-11) {
    const int nodes = 1001;
    double best = lo;
    while (hi - lo > tol) {
        const double h = (hi - lo) / (nodes - 1);
        double fbest = std::numeric_limits<double>::infinity();
        for (int j = 0; j < nodes; ++j) {
            const double u = lo + h * j;
            const double v = f(u);
            if (v < fbest) {
                fbest = v;
                best = u;
            }
        }
        lo = std::max(lo, best - 2 * h);
        hi = std::min(hi, best + 2 * h);
    }
    return best;
}

/// Root of an increasing function g on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iters = 200) {
    for (int j = 0; j < iters; ++j) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Composite Simpson rule on [a, b] with 2*half intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int half = 2000) {
    const int n = 2 * half;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int j = 1; j < n; ++j) s += (j % 2 ? 4.0 : 2.0) * f(a + h * j);
    return s * h / 3.0;
}

/// Optimal transport cost between uniform empirical measures on x and y with
/// cost |u - v|^p, solved as an integer min-cost flow (successive shortest
/// paths with Bellman-Ford). Returns W_p.
inline double transport_flow_wasserstein(double p, const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size(), m = y.size();
    const long long total = std::lcm(static_cast<long long>(n), static_cast<long long>(m));
    // Nodes: source 0, x-atoms 1..n, y-atoms n+1..n+m, sink n+m+1.
    struct Edge {
        std::size_t to;
        long long cap;
        double cost;
    };
    const std::size_t nodes = n + m + 2, src = 0, snk = n + m + 1;
    std::vector<Edge> edges;
    std::vector<std::vector<std::size_t>> adj(nodes);
    auto add = [&](std::size_t a, std::size_t b, long long cap, double cost) {
        adj[a].push_back(edges.size());
        edges.push_back({b, cap, cost});
        adj[b].push_back(edges.size());
        edges.push_back({a, 0, -cost});
    };
    for (std::size_t i = 0; i < n; ++i) add(src, 1 + i, total / static_cast<long long>(n), 0.0);
    for (std::size_t j = 0; j < m; ++j) add(1 + n + j, snk, total / static_cast<long long>(m), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) add(1 + i, 1 + n + j, total, std::pow(std::abs(x[i] - y[j]), p));
    }
    double cost = 0.0;
    long long flow = 0;
    while (flow < total) {
        std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
        std::vector<std::size_t> via(nodes, edges.size());
        dist[src] = 0.0;
        for (std::size_t round = 0; round < nodes; ++round) {
            bool changed = false;
            for (std::size_t a = 0; a < nodes; ++a) {
                if (!std::isfinite(dist[a])) continue;
                for (std::size_t e : adj[a]) {
                    if (edges[e].cap > 0 && dist[a] + edges[e].cost < dist[edges[e].to] - 1e-15) {
                        dist[edges[e].to] = dist[a] + edges[e].cost;
                        via[edges[e].to] = e;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        long long push = total - flow;
        for (std::size_t v = snk; v != src; v = edges[via[v] ^ 1].to) push = std::min(push, edges[via[v]].cap);
        for (std::size_t v = snk; v != src; v = edges[via[v] ^ 1].to) {
            edges[via[v]].cap -= push;
            edges[via[v] ^ 1].cap += push;
            cost += static_cast<double>(push) * edges[via[v]].cost;
        }
        flow += push;
    }
    return std::pow(cost / static_cast<double>(total), 1.0 / p);
}

/// E max_{0<=j<=M} S_j for a Gaussian walk with step variance dt, by Spitzer's
/// identity sum_k E[S_k^+] / k. By time reversal of the Lindley recursion this
/// is also E X_M for the projected Euler scheme on [0, inf) started at 0.
inline double reflected_walk_mean(std::size_t steps, double horizon) {
    const double dt = horizon / static_cast<double>(steps);
    double s = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) s += std::sqrt(dt / (2.0 * M_PI * static_cast<double>(k)));
    return s;
}

struct Sample {
    double mean = 0.0;
    double std_error = 0.0;
};

inline Sample summarize(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Monte Carlo E max_k B_{t_k}^2 on an M-step grid over [0, T].
inline Sample brownian_sup_square(std::size_t paths, std::size_t steps, double horizon, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    const double sd = std::sqrt(horizon / static_cast<double>(steps));
    std::vector<double> v(paths);
    for (auto& out : v) {
        double b = 0.0, sup = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            b += sd * z(gen);
            sup = std::max(sup, b * b);
        }
        out = sup;
    }
    return summarize(v);
}

/// Nested Monte Carlo for Y_0 = E[G(B_T)] with B from 0: outer paths run to
/// T/2, inner paths estimate E[G(B_T) | B_{T/2}] and the outer mean averages
/// them. The standard error covers both levels.
inline Sample nested_terminal_value(const std::function<double(double)>& g, double horizon, std::size_t outer,
                                    std::size_t inner, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    const double sd = std::sqrt(horizon / 2.0);
    std::vector<double> cond(outer);
    for (auto& c : cond) {
        const double mid = sd * z(gen);
        double s = 0.0;
        for (std::size_t j = 0; j < inner; ++j) s += g(mid + sd * z(gen));
        c = s / static_cast<double>(inner);
    }
    return summarize(cond);
}

}  // namespace oracle
