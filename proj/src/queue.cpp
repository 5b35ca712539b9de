#include "mulgraph/queue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mulgraph/common.hpp"
#include "mulgraph/numeric.hpp"

namespace mulgraph::queue {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LifoResult lifo_replay(const std::vector<LifoArrival>& arrivals) {
    const int m = static_cast<int>(arrivals.size());
    for (int k = 1; k < m; ++k) {
        if (!(arrivals[k - 1].time < arrivals[k].time))
            throw CollisionError("lifo_replay: arrival times must be strictly increasing");
    }
    for (const auto& a : arrivals) {
        if (!(a.service > 0.0))
            throw std::invalid_argument("lifo_replay: services must be positive");
    }

    LifoResult out;
    out.parent.assign(m, 0);
    out.depth.assign(m, 0);
    out.departure.assign(m, kInf);
    out.h_times.push_back(0.0);
    out.h_values.push_back(0.0);

    std::vector<int> stack;              // arrival indices, bottom to top
    std::vector<double> remaining(m);    // residual service per arrival index
    double t = 0.0;
    int i = 0;

    while (i < m || !stack.empty()) {
        if (stack.empty()) {
            t = arrivals[i].time;
            remaining[i] = arrivals[i].service;
            out.parent[i] = 0;
            stack.push_back(i);
            out.depth[i] = 1;
            out.h_times.push_back(t);
            out.h_values.push_back(1.0);
            ++i;
            continue;
        }
        const int top = stack.back();
        const double t_fin = t + remaining[top];
        if (i < m && arrivals[i].time == t_fin)
            throw RetryTrial("lifo_replay: departure coincides with an arrival");
        if (i < m && arrivals[i].time < t_fin) {
            // preemption: the newcomer interrupts the client in service
            remaining[top] -= arrivals[i].time - t;
            out.segments.push_back({t, arrivals[i].time, arrivals[top].id});
            t = arrivals[i].time;
            remaining[i] = arrivals[i].service;
            out.parent[i] = arrivals[top].id;
            stack.push_back(i);
            out.depth[i] = static_cast<int>(stack.size());
            out.h_times.push_back(t);
            out.h_values.push_back(static_cast<double>(stack.size()));
            ++i;
        } else {
            out.segments.push_back({t, t_fin, arrivals[top].id});
            out.departure[top] = t_fin;
            stack.pop_back();
            t = t_fin;
            out.h_times.push_back(t);
            out.h_values.push_back(static_cast<double>(stack.size()));
        }
    }
    out.end_time = t;
    return out;
}

int ExplorationTree::served_at(double t) const {
    // segments are chronological and non-overlapping; binary search by t0
    if (segments.empty()) return 0;
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const ServiceSegment& s) { return v < s.t0; });
    if (it == segments.begin()) return 0;
    --it;
    return (t < it->t1) ? it->id : 0;
}

bool ExplorationTree::is_ancestor(int a, int b) const {
    while (b > 0) {
        if (b == a) return true;
        b = parent[b];
    }
    return a == b; // only when a == 0
}

bool Graph::has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return edges.count({i, j}) > 0;
}

void Graph::add_edge(int i, int j, EdgeKind kind) {
    if (i == j) throw std::invalid_argument("Graph: loop rejected");
    if (i > j) std::swap(i, j);
    edges.emplace(std::make_pair(i, j), kind); // keeps the first kind on repeats
}

Arrivals sample_arrivals(const Weights& w, Rng& rng) {
    const int n = w.n();
    Arrivals arr;
    arr.E.resize(n);
    for (int j = 0; j < n; ++j) arr.E[j] = rng.exponential(w[j] / w.sigma1());

    // exact float ties break the strict-order replay; redraw both offenders
    for (;;) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return arr.E[a] < arr.E[b]; });
        bool clean = true;
        for (int k = 1; k < n; ++k) {
            int a = order[k - 1], b = order[k];
            if (arr.E[a] == arr.E[b]) {
                arr.E[a] = rng.exponential(w[a] / w.sigma1());
                arr.E[b] = rng.exponential(w[b] / w.sigma1());
                ++arr.collisions_resampled;
                clean = false;
            }
        }
        if (clean) break;
    }
    return arr;
}

PiecewisePath load_path(const Weights& w, const Arrivals& arr) {
    const int n = w.n();
    if (static_cast<int>(arr.E.size()) != n)
        throw std::invalid_argument("load_path: arrival count must match weight count");
    std::vector<PiecewisePath::Jump> jumps(n);
    double emax = 0.0;
    for (int j = 0; j < n; ++j) {
        jumps[j] = {arr.E[j], w[j]};
        emax = std::max(emax, arr.E[j]);
    }
    return PiecewisePath(-1.0, jumps, w.sigma1() + emax);
}

namespace {

std::vector<LifoArrival> arrivals_by_time(const Weights& w, const Arrivals& arr) {
    const int n = w.n();
    std::vector<LifoArrival> a(n);
    for (int j = 0; j < n; ++j) a[j] = {arr.E[j], w[j], j + 1};
    std::sort(a.begin(), a.end(),
              [](const LifoArrival& x, const LifoArrival& y) { return x.time < y.time; });
    return a;
}

} // namespace

ExplorationTree exploration_tree(const Weights& w, const Arrivals& arr) {
    const int n = w.n();
    const auto a = arrivals_by_time(w, arr);
    const LifoResult r = lifo_replay(a);

    ExplorationTree tree;
    tree.parent.assign(n + 1, -1);
    tree.height.assign(n + 1, 0);
    tree.departure.assign(n + 1, 0.0);
    tree.service_intervals.resize(n + 1);
    tree.segments = r.segments;
    tree.end_time = r.end_time;
    for (int k = 0; k < n; ++k) {
        tree.parent[a[k].id] = r.parent[k];
        tree.height[a[k].id] = r.depth[k];
        tree.departure[a[k].id] = r.departure[k];
    }
    for (const auto& s : r.segments)
        tree.service_intervals[s.id].emplace_back(s.t0, s.t1);
    return tree;
}

StepFunction height_process(const PiecewisePath& path) {
    std::vector<LifoArrival> a(path.jumps().size());
    for (size_t k = 0; k < a.size(); ++k)
        a[k] = {path.jumps()[k].time, path.jumps()[k].size, static_cast<int>(k) + 1};
    LifoResult r = lifo_replay(a);

    // the queue always empties within the horizon for load paths, but trim
    // defensively so the step function stays inside its domain
    std::vector<double> ts, vs;
    for (size_t k = 0; k < r.h_times.size(); ++k) {
        if (r.h_times[k] > path.horizon()) break;
        ts.push_back(r.h_times[k]);
        vs.push_back(r.h_values[k]);
    }
    return StepFunction(ts, vs, path.horizon());
}

double reflected_area(const PiecewisePath& path) {
    // between consecutive jumps the gap Y - J decays linearly at rate 1 and
    // sticks at zero, so each piece contributes g*dt - dt^2/2 or g^2/2
    const auto& jumps = path.jumps();
    std::vector<double> pieces;
    double t_prev = 0.0;
    double gap = 0.0;
    auto piece_area = [](double g, double dt) {
        if (g >= dt) return g * dt - 0.5 * dt * dt;
        return 0.5 * g * g;
    };
    for (const auto& j : jumps) {
        const double dt = j.time - t_prev;
        pieces.push_back(piece_area(gap, dt));
        gap = std::max(0.0, gap - dt) + j.size;
        t_prev = j.time;
    }
    pieces.push_back(piece_area(gap, path.horizon() - t_prev));
    return numeric::pairwise_sum(pieces);
}

PinchSet sample_pinch_points(const PiecewisePath& path, double sigma1, Rng& rng) {
    if (!(sigma1 > 0.0)) throw std::invalid_argument("sample_pinch_points: sigma1 must be positive");
    const auto& jumps = path.jumps();
    const size_t K = jumps.size();

    // per-segment areas and their prefix sums, for inverse-transform placement
    std::vector<double> seg_start(K + 1), seg_gap(K + 1), seg_len(K + 1), seg_area(K + 1);
    {
        double t_prev = 0.0, gap = 0.0;
        for (size_t k = 0; k < K; ++k) {
            const double dt = jumps[k].time - t_prev;
            seg_start[k] = t_prev;
            seg_gap[k] = gap;
            seg_len[k] = dt;
            gap = std::max(0.0, gap - dt) + jumps[k].size;
            t_prev = jumps[k].time;
        }
        seg_start[K] = t_prev;
        seg_gap[K] = gap;
        seg_len[K] = path.horizon() - t_prev;
    }
    std::vector<double> prefix(K + 2, 0.0);
    for (size_t k = 0; k <= K; ++k) {
        const double g = seg_gap[k], dt = seg_len[k];
        seg_area[k] = (g >= dt) ? g * dt - 0.5 * dt * dt : 0.5 * g * g;
        prefix[k + 1] = prefix[k] + seg_area[k];
    }
    const double total = prefix[K + 1];

    PinchSet out;
    if (total <= 0.0) return out;
    const int count = rng.poisson(total / sigma1);
    out.atoms.reserve(count);
    for (int p = 0; p < count; ++p) {
        const double u = rng.uniform(0.0, total);
        const size_t k = static_cast<size_t>(
            std::upper_bound(prefix.begin(), prefix.end(), u) - prefix.begin() - 1);
        const size_t seg = std::min(k, K);
        const double target = u - prefix[seg];
        const double g = seg_gap[seg];
        // solve g*s - s^2/2 = target for the smaller root; clamp guards the
        // sqrt of a tiny negative from rounding at the segment's far end
        const double disc = std::max(0.0, g * g - 2.0 * target);
        double s = g - std::sqrt(disc);
        s = std::min(s, seg_len[seg]);
        const double gap_here = g - s;
        if (!(gap_here > 0.0)) { // measure-zero edge; redraw this atom
            --p;
            continue;
        }
        out.atoms.emplace_back(seg_start[seg] + s, rng.uniform(0.0, gap_here));
    }
    std::sort(out.atoms.begin(), out.atoms.end());

    // resolve each atom against the LIFO stack: walking up the stack, the
    // forward minimum from the i-th member's arrival to t_p is the (i+1)-th
    // member's entry level (the top's being Y(t_p) itself), so the earliest
    // admissible start is found by binary search over those levels
    std::vector<LifoArrival> a(K);
    for (size_t k = 0; k < K; ++k)
        a[k] = {jumps[k].time, jumps[k].size, static_cast<int>(k) + 1};

    std::vector<size_t> stack;          // jump indices, bottom to top
    std::vector<double> entry_level;    // Y just before each stacked arrival
    std::vector<double> remaining(K);
    double t = 0.0;
    size_t i = 0;
    size_t next_atom = 0;
    out.pairs.reserve(out.atoms.size());

    // strictly-before: an atom sitting exactly on an event time belongs to
    // the post-event stack (right continuity), so it resolves on the next call
    auto resolve_atoms_before = [&](double t_end) {
        while (next_atom < out.atoms.size() && out.atoms[next_atom].first < t_end) {
            const double tp = out.atoms[next_atom].first;
            const double yp = out.atoms[next_atom].second;
            if (stack.empty())
                throw std::logic_error("sample_pinch_points: atom over an idle stretch");
            const double level = yp + path.infimum(tp);
            const double y_tp = path.value(tp);
            // find the first stack index whose forward minimum exceeds level
            size_t lo = 0, hi = stack.size(); // candidate i in [lo, hi)
            while (lo < hi) {
                const size_t mid = (lo + hi) / 2;
                const double fwd_min = (mid + 1 < stack.size()) ? entry_level[mid + 1] : y_tp;
                if (fwd_min > level) hi = mid; else lo = mid + 1;
            }
            if (lo < stack.size())
                out.pairs.emplace_back(jumps[stack[lo]].time, tp);
            // lo == stack.size() would pair t_p with itself; dropped
            ++next_atom;
        }
    };

    while (i < K || !stack.empty()) {
        if (stack.empty()) {
            t = a[i].time;
            remaining[i] = a[i].service;
            stack.push_back(i);
            entry_level.push_back(path.value_left(t));
            ++i;
            continue;
        }
        const size_t top = stack.back();
        const double t_fin = t + remaining[top];
        if (i < K && a[i].time < t_fin) {
            resolve_atoms_before(a[i].time);
            remaining[top] -= a[i].time - t;
            t = a[i].time;
            remaining[i] = a[i].service;
            stack.push_back(i);
            entry_level.push_back(path.value_left(t));
            ++i;
        } else {
            resolve_atoms_before(t_fin);
            stack.pop_back();
            entry_level.pop_back();
            t = t_fin;
        }
    }
    resolve_atoms_before(std::numeric_limits<double>::infinity());
    return out;
}

Graph assemble_graph(const ExplorationTree& tree, const PinchSet& pinches) {
    Graph g;
    g.n = tree.n();
    for (int j = 1; j <= g.n; ++j) {
        if (tree.parent[j] > 0) g.add_edge(tree.parent[j], j, EdgeKind::Tree);
    }
    for (const auto& [sp, tp] : pinches.pairs) {
        const int a = tree.served_at(sp);
        const int b = tree.served_at(tp);
        if (a == 0 || b == 0)
            throw std::logic_error("assemble_graph: pinch endpoint fell in an idle stretch");
        if (a == b) continue; // self-pinch, no loop edges
        if (!tree.is_ancestor(a, b))
            throw std::logic_error("assemble_graph: pinch start must be an ancestor of its end");
        if (!g.has_edge(a, b)) g.add_edge(a, b, EdgeKind::Surplus);
    }
    return g;
}

TrialOutput sample_graph(const Weights& w, Rng& rng) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        Arrivals arr = sample_arrivals(w, rng);
        try {
            PiecewisePath path = load_path(w, arr);
            ExplorationTree tree = exploration_tree(w, arr);
            PinchSet pinches = sample_pinch_points(path, w.sigma1(), rng);
            Graph graph = assemble_graph(tree, pinches);
            return {std::move(arr), std::move(path), std::move(tree),
                    std::move(pinches), std::move(graph), attempt};
        } catch (const RetryTrial&) {
            continue; // float tie; the next draw is fresh
        }
    }
    throw std::runtime_error("sample_graph: persistent retriable ties, rng suspect");
}

} // namespace mulgraph::queue
