#include "mulgraph/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace mulgraph::oracle {

queue::Graph direct_sample(const Weights& w, Rng& rng) {
    queue::Graph g;
    g.n = w.n();
    for (int i = 1; i <= g.n; ++i) {
        for (int j = i + 1; j <= g.n; ++j) {
            const double p = 1.0 - std::exp(-w[i - 1] * w[j - 1] / w.sigma1());
            if (rng.uniform() < p) g.add_edge(i, j, queue::EdgeKind::Surplus);
        }
    }
    return g;
}

std::vector<int> bfs_distances(const queue::Graph& g, int source) {
    if (source < 1 || source > g.n) throw std::invalid_argument("bfs_distances: source out of range");
    std::vector<std::vector<int>> adj(g.n + 1);
    for (const auto& [e, kind] : g.edges) {
        (void)kind;
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    std::vector<int> dist(g.n + 1, -1);
    std::deque<int> frontier{source};
    dist[source] = 0;
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop_front();
        for (int u : adj[v]) {
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                frontier.push_back(u);
            }
        }
    }
    dist.erase(dist.begin()); // callers index vertices from 1 in position 0
    return dist;
}

double forward_infimum(const PiecewisePath& path, double s, double t) {
    if (s > t) throw std::invalid_argument("forward_infimum: s > t");
    double lo = std::min(path.value(s), path.value(t));
    for (const auto& j : path.jumps()) {
        if (j.time > s && j.time <= t) lo = std::min(lo, path.value_left(j.time));
    }
    return lo;
}

int brute_height(const PiecewisePath& path, double t) {
    int count = 0;
    for (const auto& j : path.jumps()) {
        if (j.time > t) break;
        if (path.value_left(j.time) < forward_infimum(path, j.time, t)) ++count;
    }
    return count;
}

double brute_pinched_distance(const std::vector<std::vector<double>>& d,
                              const std::vector<std::pair<int, int>>& pinches,
                              double eps, int x, int y) {
    const int p = static_cast<int>(pinches.size());
    if (p > 20) throw std::invalid_argument("brute_pinched_distance: too many pinches");
    const int m = static_cast<int>(d.size());
    auto at = [&](int a, int b) {
        if (a < 0 || a >= m || b < 0 || b >= m)
            throw std::out_of_range("brute_pinched_distance: vertex outside matrix");
        return d[a][b];
    };
    if (p == 0) return at(x, y);

    // best[mask][e]: cheapest way to stand at endpoint e (2 per pinch) having
    // crossed exactly the pinches in mask, entering each via its eps link
    const int masks = 1 << p;
    const int ends = 2 * p;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(masks, std::vector<double>(ends, inf));
    auto vertex_of = [&](int e) {
        const auto& pr = pinches[e / 2];
        return (e % 2 == 0) ? pr.first : pr.second;
    };
    auto mate = [&](int e) { return e ^ 1; };

    for (int e = 0; e < ends; ++e) {
        const int bit = 1 << (e / 2);
        best[bit][e] = at(x, vertex_of(mate(e))) + eps;
    }
    double ans = at(x, y);
    for (int mask = 1; mask < masks; ++mask) {
        for (int e = 0; e < ends; ++e) {
            const double cur = best[mask][e];
            if (cur == inf) continue;
            ans = std::min(ans, cur + at(vertex_of(e), y));
            for (int q = 0; q < p; ++q) {
                if (mask & (1 << q)) continue;
                const int nmask = mask | (1 << q);
                for (int side = 0; side < 2; ++side) {
                    const int enter = 2 * q + side; // walk to this endpoint, cross to its mate
                    const double cost = cur + at(vertex_of(e), vertex_of(enter)) + eps;
                    if (cost < best[nmask][mate(enter)])
                        best[nmask][mate(enter)] = cost;
                }
            }
        }
    }
    return ans;
}

} // namespace mulgraph::oracle
