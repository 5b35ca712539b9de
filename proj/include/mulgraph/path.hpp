#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace mulgraph {

// Cadlag path with constant drift between finitely many upward jumps.
// Jump times must be strictly increasing; an exact tie is a construction
// error (CollisionError), never silently perturbed. Evaluation is event
// driven: no grid is involved anywhere.
class PiecewisePath {
public:
    struct Jump {
        double time;
        double size; // > 0
    };

    PiecewisePath() : PiecewisePath(0.0, {}, 0.0) {}
    PiecewisePath(double drift, std::vector<Jump> jumps, double horizon);

    double drift() const { return drift_; }
    double horizon() const { return horizon_; }
    const std::vector<Jump>& jumps() const { return jumps_; }

    double value(double t) const;      // right-continuous value
    double value_left(double t) const; // left limit

    // running infimum over [0, t]
    double infimum(double t) const;

    // index of the last jump with time <= t, or -1
    int last_jump_before(double t) const;

    // rows (time, value_left, value_right) at 0, every jump, and the horizon
    void write_csv(std::ostream& out) const;

private:
    double drift_;
    std::vector<Jump> jumps_;
    double horizon_;
    std::vector<double> value_after_;   // value right after jump k
    std::vector<double> inf_up_to_;     // running inf just before jump k
};

// free-function spelling used by callers that treat the path as data
double path_infimum(const PiecewisePath& p, double t);

// Right-continuous step function given by (time, value) breakpoints;
// breakpoints[0].first must be 0 so the function is defined on [0, horizon].
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> times, std::vector<double> values, double horizon);

    double horizon() const { return horizon_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

    double value(double t) const;
    double value_left(double t) const;

    // index of the segment containing t
    std::size_t segment(double t) const;

    // minimum attained value over [a, b] (linear scan; see excursions for the
    // range-minimum structure used in hot paths)
    double min_on(double a, double b) const;

    void write_csv(std::ostream& out) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    double horizon_ = 0.0;
};

} // namespace mulgraph
