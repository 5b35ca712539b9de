#include "mulgraph/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mulgraph::excursions {

std::vector<Excursion> excursion_intervals(const StepFunction& h) {
    const std::vector<double>& ts = h.times();
    const std::vector<double>& vs = h.values();
    std::vector<Excursion> out;
    std::size_t open = 0;
    bool inside = false;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!inside && vs[i] > 0.0) {
            inside = true;
            open = i;
        } else if (inside && vs[i] <= 0.0) {
            inside = false;
            double l = ts[open];
            std::vector<double> et(ts.begin() + static_cast<long>(open),
                                   ts.begin() + static_cast<long>(i));
            std::vector<double> ev(vs.begin() + static_cast<long>(open),
                                   vs.begin() + static_cast<long>(i));
            for (double& t : et) t -= l;
            out.push_back({l, ts[i], StepFunction(std::move(et), std::move(ev), ts[i] - l)});
        }
    }
    if (inside) {
        // absorbed only at the horizon; treat the tail as one excursion
        double l = ts[open];
        std::vector<double> et(ts.begin() + static_cast<long>(open), ts.end());
        std::vector<double> ev(vs.begin() + static_cast<long>(open), vs.end());
        for (double& t : et) t -= l;
        out.push_back({l, h.horizon(), StepFunction(std::move(et), std::move(ev), h.horizon() - l)});
    }
    std::sort(out.begin(), out.end(), [](const Excursion& a, const Excursion& b) {
        if (a.zeta() != b.zeta()) return a.zeta() > b.zeta();
        return a.l < b.l;
    });
    return out;
}

std::vector<Excursion> excursion_intervals(const PiecewisePath& y) {
    return excursion_intervals(queue::height_process(y));
}

std::vector<std::vector<std::pair<double, double>>>
per_component_pinches(const queue::PinchSet& pinches,
                      const std::vector<Excursion>& excs) {
    std::vector<std::vector<std::pair<double, double>>> out(excs.size());

    // interval lookup in time order; excs itself stays mass-ordered
    std::vector<std::size_t> by_l(excs.size());
    for (std::size_t k = 0; k < excs.size(); ++k) by_l[k] = k;
    std::sort(by_l.begin(), by_l.end(),
              [&](std::size_t a, std::size_t b) { return excs[a].l < excs[b].l; });
    std::vector<double> starts(by_l.size());
    for (std::size_t k = 0; k < by_l.size(); ++k) starts[k] = excs[by_l[k]].l;

    for (const auto& [sp, tp] : pinches.pairs) {
        auto it = std::upper_bound(starts.begin(), starts.end(), tp);
        if (it == starts.begin())
            throw std::logic_error("pinch precedes every excursion");
        std::size_t k = by_l[static_cast<std::size_t>(it - starts.begin()) - 1];
        const Excursion& e = excs[k];
        if (tp > e.r || sp < e.l || sp > e.r)
            throw std::logic_error("pinch pair straddles an excursion boundary");
        out[k].emplace_back(sp - e.l, tp - e.l);
    }
    for (auto& lst : out)
        std::sort(lst.begin(), lst.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

TreeCoder::TreeCoder(const StepFunction& h) : h_(&h), rmq_(h.values()) {}

double TreeCoder::distance(double s, double t) const {
    if (s > t) std::swap(s, t);
    double ground = rmq_.query(h_->segment(s), h_->segment(t));
    return h_->value(s) + h_->value(t) - 2.0 * ground;
}

double tree_distance(const StepFunction& h, double s, double t) {
    return TreeCoder(h).distance(s, t);
}

double FiniteMetricSpace::total_mass() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
}

FiniteMetricSpace pinched_metric_space(const Excursion& exc,
                                       const std::vector<std::pair<double, double>>& pairs,
                                       double eps,
                                       const std::vector<int>& labels,
                                       const std::vector<double>& masses) {
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");

    // one point per client: the up-steps of the stack depth are arrivals
    const std::vector<double>& ts = exc.h.times();
    const std::vector<double>& vs = exc.h.values();
    std::vector<double> rep;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double prev = (i == 0) ? 0.0 : vs[i - 1];
        if (vs[i] > prev) rep.push_back(ts[i]);
    }
    std::size_t n = rep.size();
    if (!labels.empty() && labels.size() != n)
        throw std::invalid_argument("label count does not match client count");
    if (!masses.empty() && masses.size() != n)
        throw std::invalid_argument("mass count does not match client count");

    TreeCoder coder(exc.h);
    std::size_t p = pairs.size();
    std::vector<double> ep(2 * p);
    for (std::size_t i = 0; i < p; ++i) {
        ep[2 * i] = pairs[i].first;
        ep[2 * i + 1] = pairs[i].second;
    }

    // shortcut closure over the 2p pinch endpoints
    std::vector<std::vector<double>> S(2 * p, std::vector<double>(2 * p, 0.0));
    for (std::size_t u = 0; u < 2 * p; ++u)
        for (std::size_t v = 0; v < 2 * p; ++v)
            S[u][v] = coder.distance(ep[u], ep[v]);
    for (std::size_t i = 0; i < p; ++i) {
        double link = std::min(eps, S[2 * i][2 * i + 1]);
        S[2 * i][2 * i + 1] = std::min(S[2 * i][2 * i + 1], link);
        S[2 * i + 1][2 * i] = S[2 * i][2 * i + 1];
    }
    for (std::size_t m = 0; m < 2 * p; ++m)
        for (std::size_t u = 0; u < 2 * p; ++u)
            for (std::size_t v = 0; v < 2 * p; ++v)
                S[u][v] = std::min(S[u][v], S[u][m] + S[m][v]);

    std::vector<std::vector<double>> toep(n, std::vector<double>(2 * p));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t u = 0; u < 2 * p; ++u)
            toep[i][u] = coder.distance(rep[i], ep[u]);

    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double best = coder.distance(rep[i], rep[j]);
            for (std::size_t u = 0; u < 2 * p; ++u)
                for (std::size_t v = 0; v < 2 * p; ++v)
                    best = std::min(best, toep[i][u] + S[u][v] + toep[j][v]);
            d[i][j] = d[j][i] = best;
        }

    FiniteMetricSpace out;
    std::vector<int> lab(n);
    for (std::size_t i = 0; i < n; ++i)
        lab[i] = labels.empty() ? static_cast<int>(i + 1) : labels[i];
    std::vector<double> ms(n, 0.0);
    if (!masses.empty()) ms = masses;

    if (eps > 0.0) {
        out.labels = lab;
        out.mass = ms;
        out.dist = std::move(d);
        out.classes.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.classes[i] = {lab[i]};
        out.root = 0;
        return out;
    }

    // eps = 0: collapse the pseudometric; only distances below the fixed
    // threshold count as zero
    numeric::UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (d[i][j] < 1e-12) uf.unite(i, j);
    std::vector<long> cls(n, -1);
    std::vector<std::size_t> cls_rep;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = uf.find(i);
        if (cls[r] < 0) {
            cls[r] = static_cast<long>(cls_rep.size());
            cls_rep.push_back(i);
        }
        cls[i] = cls[r];
    }
    std::size_t m = cls_rep.size();
    out.labels.resize(m);
    out.classes.assign(m, {});
    out.mass.assign(m, 0.0);
    out.dist.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = static_cast<std::size_t>(cls[i]);
        out.classes[c].push_back(lab[i]);
        out.mass[c] += ms[i];
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::sort(out.classes[c].begin(), out.classes[c].end());
        out.labels[c] = out.classes[c].front();
    }
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            out.dist[a][b] = out.dist[b][a] = d[cls_rep[a]][cls_rep[b]];
    out.root = static_cast<int>(cls[0]);
    return out;
}

std::vector<FiniteMetricSpace> component_spaces(const queue::TrialOutput& trial,
                                                const Weights& w, double eps) {
    StepFunction h = queue::height_process(trial.path);
    std::vector<Excursion> excs = excursion_intervals(h);
    auto local = per_component_pinches(trial.pinches, excs);

    std::vector<FiniteMetricSpace> out;
    out.reserve(excs.size());
    for (std::size_t k = 0; k < excs.size(); ++k) {
        const Excursion& e = excs[k];
        std::vector<std::pair<double, int>> members; // (arrival, client id)
        for (int j = 1; j <= w.n(); ++j) {
            double t = trial.arrivals.E[static_cast<std::size_t>(j - 1)];
            if (t >= e.l && t < e.r) members.emplace_back(t, j);
        }
        std::sort(members.begin(), members.end());
        std::vector<int> labels;
        std::vector<double> masses;
        double total = 0.0;
        for (auto& [t, j] : members) {
            labels.push_back(j);
            masses.push_back(w[j - 1]);
            total += w[j - 1];
        }
        if (std::abs(total - e.zeta()) > 1e-9 * std::max(1.0, e.zeta()))
            throw std::logic_error("component mass does not match excursion length");
        out.push_back(pinched_metric_space(e, local[k], eps, labels, masses));
    }
    return out;
}

} // namespace mulgraph::excursions
