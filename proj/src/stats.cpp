#include "mulgraph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mulgraph/common.hpp"
#include "mulgraph/markov.hpp"
#include "mulgraph/numeric.hpp"
#include "mulgraph/oracle.hpp"
#include "mulgraph/parallel.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"

namespace mulgraph::stats {

namespace {

// distinct deterministic streams for the two samplers under one user seed
constexpr std::uint64_t kDirectStream = 0xd1b54a32d192ed03ull;
constexpr std::uint64_t kSecondStream = 0x8cb92ba72f3d8dd7ull;

int pair_index(int i, int j, int n) {
    // (i, j) with 1 <= i < j <= n, lexicographic
    return (i - 1) * n - (i * (i - 1)) / 2 + (j - i) - 1;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            out.emplace_back(i, j);
    return out;
}

void corrupt_graph(queue::Graph& g, Rng& rng) {
    // spurious extra edges at a fixed rate; only power checks use this
    for (int i = 1; i <= g.n; ++i)
        for (int j = i + 1; j <= g.n; ++j)
            if (!g.has_edge(i, j) && rng.uniform() < 0.05)
                g.add_edge(i, j, queue::EdgeKind::Surplus);
}

std::uint32_t graph_mask(const queue::Graph& g) {
    std::uint32_t mask = 0;
    for (const auto& [key, kind] : g.edges) {
        (void)kind;
        mask |= 1u << pair_index(key.first, key.second, g.n);
    }
    return mask;
}

// chi-square between two count vectors over the same cells, sparse cells
// pooled; returns (stat, df, pooled)
struct TwoSampleChi {
    double stat = 0.0;
    double df = 0.0;
    int pooled = 0;
};

TwoSampleChi two_sample_chi(const std::vector<long>& x, const std::vector<long>& y) {
    double nx = 0.0, ny = 0.0;
    for (long v : x) nx += static_cast<double>(v);
    for (long v : y) ny += static_cast<double>(v);
    double k1 = std::sqrt(ny / nx);
    double k2 = std::sqrt(nx / ny);
    TwoSampleChi r;
    long px = 0, py = 0;
    int cells = 0;
    for (std::size_t c = 0; c < x.size(); ++c) {
        long total = x[c] + y[c];
        if (total < 10) {
            px += x[c];
            py += y[c];
            ++r.pooled;
            continue;
        }
        double d = k1 * static_cast<double>(x[c]) - k2 * static_cast<double>(y[c]);
        r.stat += d * d / static_cast<double>(total);
        ++cells;
    }
    if (px + py > 0) {
        double d = k1 * static_cast<double>(px) - k2 * static_cast<double>(py);
        r.stat += d * d / static_cast<double>(px + py);
        ++cells;
    }
    r.df = std::max(1, cells - 1);
    return r;
}

// Walks one component of the queue from an empty server, returning every
// client's child count. The component closes at the first idle instant, so
// no subtree is ever cut: the counts are exactly the exploration's offspring
// draws stopped at a stopping time.
std::vector<int> one_component_census(const Weights& w, Rng& rng) {
    struct Entry {
        int idx;
        double remaining;
    };
    std::vector<int> children;
    std::vector<Entry> stack;
    const std::vector<double>& rates = w.values();
    int ty = static_cast<int>(rng.discrete(rates, w.sigma1()));
    children.push_back(0);
    stack.push_back({0, w[ty]});
    while (true) {
        double gap = rng.exponential(1.0);
        while (gap >= stack.back().remaining) {
            gap -= stack.back().remaining;
            stack.pop_back();
            if (stack.empty()) return children; // the pending arrival opens the next component
        }
        stack.back().remaining -= gap;
        ++children[static_cast<std::size_t>(stack.back().idx)];
        ty = static_cast<int>(rng.discrete(rates, w.sigma1()));
        children.push_back(0);
        stack.push_back({static_cast<int>(children.size()) - 1, w[ty]});
    }
}

double largest_component_mass(const queue::Graph& g, const Weights& w) {
    numeric::UnionFind uf(static_cast<std::size_t>(g.n));
    for (const auto& [key, kind] : g.edges) {
        (void)kind;
        uf.unite(static_cast<std::size_t>(key.first - 1),
                 static_cast<std::size_t>(key.second - 1));
    }
    std::vector<double> mass(static_cast<std::size_t>(g.n), 0.0);
    for (int j = 1; j <= g.n; ++j)
        mass[uf.find(static_cast<std::size_t>(j - 1))] += w[j - 1];
    return *std::max_element(mass.begin(), mass.end());
}

} // namespace

TestReport edge_frequency_test(const Weights& w, long trials, double alpha_level,
                               std::uint64_t seed, bool corrupt) {
    if (w.n() > 50) throw std::invalid_argument("pair table too large past n = 50");
    auto pairs = all_pairs(w.n());

    auto masks = parallel::run_trials<std::uint32_t>(trials, [&](long i) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        queue::Graph g = queue::sample_graph(w, rng).graph;
        if (corrupt) corrupt_graph(g, rng);
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (g.has_edge(pairs[k].first, pairs[k].second)) m |= 1u << k;
        return m;
    });
    std::vector<long> count(pairs.size(), 0);
    for (std::uint32_t m : masks)
        for (std::size_t k = 0; k < pairs.size(); ++k)
            if (m & (1u << k)) ++count[k];

    TestReport rep;
    rep.name = "edge_frequency";
    rep.trials = trials;
    rep.seed = seed;
    double maxz = 0.0, minp = 1.0;
    std::ostringstream detail;
    detail.precision(6);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        auto [i, j] = pairs[k];
        double p = -std::expm1(-w[i - 1] * w[j - 1] / w.sigma1());
        double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
        double phat = static_cast<double>(count[k]) / static_cast<double>(trials);
        double z = (se > 0.0) ? (phat - p) / se : 0.0;
        maxz = std::max(maxz, std::abs(z));
        minp = std::min(minp, numeric::normal_two_sided_p(z));
        if (k < 12)
            detail << (k ? " " : "") << i << "-" << j << ":" << phat << "/" << p;
    }
    rep.statistic = maxz;
    rep.p_value = std::min(1.0, minp * static_cast<double>(pairs.size()));
    rep.pass = rep.p_value > alpha_level;
    rep.detail = detail.str();
    return rep;
}

namespace {

TestReport graph_law_common(const Weights& w, long trials, double alpha_level,
                            std::uint64_t seed, bool corrupt, bool both_queue,
                            const char* name) {
    if (w.n() != 3 && w.n() != 4)
        throw std::invalid_argument("labeled-graph table needs n = 3 or 4");
    int npairs = w.n() * (w.n() - 1) / 2;
    std::size_t ncells = std::size_t{1} << npairs;

    auto qmasks = parallel::run_trials<std::uint32_t>(trials, [&](long i) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        queue::Graph g = queue::sample_graph(w, rng).graph;
        if (corrupt) corrupt_graph(g, rng);
        return graph_mask(g);
    });
    std::uint64_t dseed = seed ^ (both_queue ? kSecondStream : kDirectStream);
    auto dmasks = parallel::run_trials<std::uint32_t>(trials, [&](long i) {
        Rng rng(trial_seed(dseed, static_cast<std::uint64_t>(i)));
        queue::Graph g = both_queue ? queue::sample_graph(w, rng).graph
                                    : oracle::direct_sample(w, rng);
        return graph_mask(g);
    });

    std::vector<long> cq(ncells, 0), cd(ncells, 0);
    for (std::uint32_t m : qmasks) ++cq[m];
    for (std::uint32_t m : dmasks) ++cd[m];
    TwoSampleChi chi = two_sample_chi(cq, cd);

    TestReport rep;
    rep.name = name;
    rep.trials = trials;
    rep.seed = seed;
    rep.statistic = chi.stat;
    rep.p_value = numeric::chi2_sf(chi.stat, chi.df);
    rep.pass = rep.p_value > alpha_level;
    std::ostringstream detail;
    detail << "cells=" << ncells << " pooled=" << chi.pooled << " df=" << chi.df;
    rep.detail = detail.str();
    return rep;
}

} // namespace

TestReport graph_law_equivalence(const Weights& w, long trials, double alpha_level,
                                 std::uint64_t seed, bool corrupt) {
    return graph_law_common(w, trials, alpha_level, seed, corrupt, false,
                            "graph_law_equivalence");
}

TestReport graph_law_calibration(const Weights& w, long trials, double alpha_level,
                                 std::uint64_t seed) {
    return graph_law_common(w, trials, alpha_level, seed, false, true,
                            "graph_law_calibration");
}

TestReport offspring_test(const Weights& w, long nodes, double alpha_level,
                          std::uint64_t seed) {
    if (classify(w) == Criticality::Supercritical)
        throw std::invalid_argument("offspring census needs (sub)critical weights");

    Rng rng(trial_seed(seed, 0));
    std::vector<long> tally;
    long total = 0;
    long components = 0;
    while (total < nodes) {
        std::vector<int> kids = one_component_census(w, rng);
        ++components;
        for (int k : kids) {
            if (static_cast<std::size_t>(k) >= tally.size())
                tally.resize(static_cast<std::size_t>(k) + 1, 0);
            ++tally[static_cast<std::size_t>(k)];
            ++total;
        }
    }

    // theoretical cells; everything past the 1e-6 tail shares one bucket
    int kmax = 1;
    std::vector<double> pmf = markov::offspring_pmf(w, 200);
    while (kmax < 200 && pmf[static_cast<std::size_t>(kmax)] >= 1e-6) ++kmax;
    double stat = 0.0;
    int cells = 0;
    double tail_p = 0.0;
    long tail_o = 0;
    for (std::size_t k = 0; k < std::max(tally.size(), static_cast<std::size_t>(kmax) + 1); ++k) {
        double p = (k <= 200) ? pmf[std::min<std::size_t>(k, 200)] : 0.0;
        long o = (k < tally.size()) ? tally[k] : 0;
        double e = p * static_cast<double>(total);
        if (k >= static_cast<std::size_t>(kmax) || e < 5.0) {
            tail_p += p;
            tail_o += o;
            continue;
        }
        stat += (static_cast<double>(o) - e) * (static_cast<double>(o) - e) / e;
        ++cells;
    }
    tail_p += pmf.back(); // pmf's own trailing tail mass past 200
    double etail = tail_p * static_cast<double>(total);
    if (etail > 0.0) {
        stat += (static_cast<double>(tail_o) - etail) * (static_cast<double>(tail_o) - etail) / etail;
        ++cells;
    }

    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < tally.size(); ++k) {
        mean += static_cast<double>(k) * static_cast<double>(tally[k]);
        m2 += static_cast<double>(k) * static_cast<double>(k) * static_cast<double>(tally[k]);
    }
    mean /= static_cast<double>(total);
    double var = m2 / static_cast<double>(total) - mean * mean;
    double target = w.sigma2() / w.sigma1();
    double zmean = (mean - target) / std::sqrt(std::max(var, 1e-12) / static_cast<double>(total));

    TestReport rep;
    rep.name = "offspring_law";
    rep.trials = total;
    rep.seed = seed;
    rep.statistic = stat;
    rep.p_value = numeric::chi2_sf(stat, std::max(1, cells - 1));
    rep.pass = rep.p_value > alpha_level && std::abs(zmean) <= 3.0;
    std::ostringstream detail;
    detail.precision(6);
    detail << "components=" << components << " cells=" << cells << " mean=" << mean
           << " target=" << target << " zmean=" << zmean;
    rep.detail = detail.str();
    return rep;
}

TestReport mass_distribution_test(const Weights& w, long trials, double alpha_level,
                                  std::uint64_t seed) {
    auto qmass = parallel::run_trials<double>(trials, [&](long i) {
        Rng rng(trial_seed(seed, static_cast<std::uint64_t>(i)));
        return largest_component_mass(queue::sample_graph(w, rng).graph, w);
    });
    std::uint64_t dseed = seed ^ kDirectStream;
    auto dmass = parallel::run_trials<double>(trials, [&](long i) {
        Rng rng(trial_seed(dseed, static_cast<std::uint64_t>(i)));
        return largest_component_mass(oracle::direct_sample(w, rng), w);
    });

    TestReport rep;
    rep.name = "mass_distribution";
    rep.trials = trials;
    rep.seed = seed;
    rep.p_value = numeric::ks_two_sample_p(qmass, dmass);
    rep.statistic = rep.p_value;
    rep.pass = rep.p_value > alpha_level;
    std::nth_element(qmass.begin(), qmass.begin() + static_cast<long>(qmass.size()) / 2, qmass.end());
    std::nth_element(dmass.begin(), dmass.begin() + static_cast<long>(dmass.size()) / 2, dmass.end());
    double mq = qmass[qmass.size() / 2];
    double md = dmass[dmass.size() / 2];
    std::ostringstream detail;
    detail.precision(6);
    detail << "median_queue=" << mq << " median_direct=" << md;
    rep.detail = detail.str();
    return rep;
}

void rescale_export(const Weights& w, double a_n, double b_n, int rows,
                    std::uint64_t seed, std::ostream& out) {
    if (a_n <= 0.0 || b_n <= 0.0) throw std::invalid_argument("scaling constants must be positive");
    Rng rng(trial_seed(seed, 0));
    markov::Embedding e = [&] {
        for (int attempt = 0;; ++attempt) {
            try {
                return markov::build_embedding(w, rng);
            } catch (const CollisionError&) {
                if (attempt >= 100) throw;
            }
        }
    }();
    StepFunction hx = markov::markov_height(e.X);
    StepFunction hy = queue::height_process(e.Y);

    const double cap = std::min(e.X.horizon(), e.Y.horizon());
    double tend = cap / b_n;
    out << "t,X,H,Y,cal_H\n";
    out.precision(12);
    for (int r = 0; r <= rows; ++r) {
        double t = tend * static_cast<double>(r) / static_cast<double>(rows);
        // rescaling back can overshoot the horizon by an ulp on the last row
        double u = std::min(b_n * t, cap);
        out << t << ',' << e.X.value(u) / a_n << ',' << (a_n / b_n) * hx.value(u) << ','
            << e.Y.value(u) / a_n << ',' << (a_n / b_n) * hy.value(u) << '\n';
    }
}

} // namespace mulgraph::stats
