#pragma once

#include <utility>
#include <vector>

#include "mulgraph/numeric.hpp"
#include "mulgraph/path.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/weights.hpp"

namespace mulgraph::excursions {

// One maximal interval where the coding function stays positive, carried on
// its own clock: h(t) = original(l + t) for t in [0, r - l).
struct Excursion {
    double l = 0.0;
    double r = 0.0;
    StepFunction h;

    double zeta() const { return r - l; }
};

// Maximal intervals with value > 0, longest first, earlier start first on
// equal lengths.
std::vector<Excursion> excursion_intervals(const StepFunction& h);

// Same decomposition read off a load path through its stack replay.
std::vector<Excursion> excursion_intervals(const PiecewisePath& y);

// Pinch pairs regrouped by the excursion containing t_p and shifted to its
// clock. A pair whose s_p falls outside that excursion signals a bug in the
// resolution step and throws logic_error.
std::vector<std::vector<std::pair<double, double>>>
per_component_pinches(const queue::PinchSet& pinches,
                      const std::vector<Excursion>& excs);

// Evaluator for the coded tree metric d(s, t) = h(s) + h(t) - 2 min over
// [s, t]; the minimum comes from a sparse range-minimum table, so distance
// queries cost O(1) after an O(n log n) build.
class TreeCoder {
public:
    explicit TreeCoder(const StepFunction& h);
    double distance(double s, double t) const;

private:
    const StepFunction* h_;
    numeric::SparseMin rmq_;
};

// one-shot spelling; builds the table per call
double tree_distance(const StepFunction& h, double s, double t);

struct FiniteMetricSpace {
    std::vector<int> labels;             // original client id per point
    std::vector<std::vector<int>> classes; // all ids merged into each point
    int root = 0;                        // index into labels
    std::vector<double> mass;
    std::vector<std::vector<double>> dist;

    int n() const { return static_cast<int>(labels.size()); }
    double total_mass() const;
};

// Metric of the coded tree with one shortcut of length eps ∧ d(a_i, b_i)
// per pair. eps = 0 merges points at distance below 1e-12 (the pseudometric
// quotient; the threshold is applied here only). labels and masses follow
// the arrival order of the excursion's clients; defaults are 1..n and 0.
FiniteMetricSpace pinched_metric_space(const Excursion& exc,
                                       const std::vector<std::pair<double, double>>& pairs,
                                       double eps,
                                       const std::vector<int>& labels = {},
                                       const std::vector<double>& masses = {});

// One space per component of the trial, largest mass first. Masses are the
// client weights; the mass of space k must equal the excursion length.
std::vector<FiniteMetricSpace> component_spaces(const queue::TrialOutput& trial,
                                                const Weights& w, double eps);

} // namespace mulgraph::excursions
