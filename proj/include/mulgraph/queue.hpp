#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mulgraph/path.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/weights.hpp"

namespace mulgraph::queue {

// ===== LIFO replay engine =====
//
// Shared by the weight-indexed queue and the Markovian queue: replays a
// last-in-first-out preemptive server over a list of timed arrivals with
// known service requirements. The stack depth over time is the height
// process; the client on top of the stack is the one being served.

struct LifoArrival {
    double time;
    double service;
    int id; // caller-chosen positive label
};

struct ServiceSegment {
    double t0, t1;
    int id; // served client; idle periods are simply absent
};

struct LifoResult {
    // indexed by arrival order
    std::vector<int> parent;          // id of the client served at arrival (0 = none)
    std::vector<int> depth;           // stack depth right after the push
    std::vector<double> departure;    // +inf if still in system when arrivals ran out
    std::vector<ServiceSegment> segments;
    std::vector<double> h_times;      // stack-depth step function
    std::vector<double> h_values;
    double end_time = 0.0;            // when the queue last emptied
};

// Throws CollisionError on equal arrival times and RetryTrial when a
// departure lands exactly on an arrival (float tie of probability zero).
LifoResult lifo_replay(const std::vector<LifoArrival>& arrivals);

// ===== domain types =====

struct Arrivals {
    std::vector<double> E; // arrival time of client j at index j-1
    int collisions_resampled = 0;
};

class ExplorationTree {
public:
    std::vector<int> parent;  // size n+1; parent[0] = -1, parent[j] in {0..n}
    std::vector<int> height;  // height[0] = 0, height[j] = height[parent[j]] + 1
    std::vector<std::vector<std::pair<double, double>>> service_intervals; // 1-based
    std::vector<ServiceSegment> segments; // chronological service record
    std::vector<double> departure;        // 1-based, departure[0] unused
    double end_time = 0.0;

    int n() const { return static_cast<int>(parent.size()) - 1; }
    int served_at(double t) const;        // V_t; 0 while the queue is idle
    bool is_ancestor(int a, int b) const; // strict or equal
};

struct PinchSet {
    std::vector<std::pair<double, double>> atoms; // (t_p, y_p)
    std::vector<std::pair<double, double>> pairs; // (s_p, t_p), s_p <= t_p
};

enum class EdgeKind { Tree, Surplus };

struct Graph {
    int n = 0;
    std::map<std::pair<int, int>, EdgeKind> edges; // key (i, j) with 1 <= i < j <= n

    bool has_edge(int i, int j) const;
    void add_edge(int i, int j, EdgeKind kind);
};

// ===== operations =====

// independent exponentials with mean sigma1/w_j; exact ties are resampled
// pairwise and counted
Arrivals sample_arrivals(const Weights& w, Rng& rng);

// drift -1, jump of w_j at E_j; horizon sigma1 + max E always covers the
// time the queue finally empties
PiecewisePath load_path(const Weights& w, const Arrivals& arr);

ExplorationTree exploration_tree(const Weights& w, const Arrivals& arr);

// stack depth of the LIFO replay of the path's jumps, as a step function on
// [0, horizon]
StepFunction height_process(const PiecewisePath& path);

// Poisson(area/sigma1) atoms placed uniformly under the reflected path
// (Y - running inf), each resolved to the time pair (s_p, t_p) where s_p is
// the earliest s whose forward infimum stays above y_p + inf_{[0,t_p]}Y.
PinchSet sample_pinch_points(const PiecewisePath& path, double sigma1, Rng& rng);

// total area between the path and its running infimum (exact, per segment)
double reflected_area(const PiecewisePath& path);

// tree edges (dropping the root) plus deduplicated surplus edges; checks the
// earlier endpoint of each pinch is a non-root ancestor of the later one
Graph assemble_graph(const ExplorationTree& tree, const PinchSet& pinches);

struct TrialOutput {
    Arrivals arrivals;
    PiecewisePath path;
    ExplorationTree tree;
    PinchSet pinches;
    Graph graph;
    int retries = 0;
};

// full pipeline; redraws the trial on retriable float ties
TrialOutput sample_graph(const Weights& w, Rng& rng);

} // namespace mulgraph::queue
