#include "mulgraph/path.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mulgraph/common.hpp"

namespace mulgraph {

PiecewisePath::PiecewisePath(double drift, std::vector<Jump> jumps, double horizon)
    : drift_(drift), jumps_(std::move(jumps)), horizon_(horizon) {
    if (!(horizon_ >= 0.0)) throw std::invalid_argument("PiecewisePath: bad horizon");
    std::sort(jumps_.begin(), jumps_.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        if (!(jumps_[k].time >= 0.0))
            throw std::invalid_argument("PiecewisePath: jump before time 0");
        if (!(jumps_[k].size > 0.0))
            throw std::invalid_argument("PiecewisePath: jump sizes must be positive");
        if (k > 0 && jumps_[k].time == jumps_[k - 1].time)
            throw CollisionError("PiecewisePath: two jumps share time " +
                                 std::to_string(jumps_[k].time));
    }
    value_after_.resize(jumps_.size());
    inf_up_to_.resize(jumps_.size());
    double v = 0.0, last_t = 0.0, inf = 0.0;
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        double before = v + drift_ * (jumps_[k].time - last_t);
        // drift is downward in every use here, but stay correct for drift >= 0
        inf = std::min(inf, std::min(v, before));
        inf_up_to_[k] = inf;
        v = before + jumps_[k].size;
        inf = std::min(inf, v);
        last_t = jumps_[k].time;
        value_after_[k] = v;
    }
}

int PiecewisePath::last_jump_before(double t) const {
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                               [](double tt, const Jump& j) { return tt < j.time; });
    return static_cast<int>(it - jumps_.begin()) - 1;
}

double PiecewisePath::value(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("PiecewisePath::value: t outside [0, horizon]");
    int k = last_jump_before(t);
    if (k < 0) return drift_ * t;
    return value_after_[k] + drift_ * (t - jumps_[k].time);
}

double PiecewisePath::value_left(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("PiecewisePath::value_left: t outside [0, horizon]");
    int k = last_jump_before(t);
    if (k >= 0 && jumps_[k].time == t)
        return (k == 0 ? drift_ * t : value_after_[k - 1] + drift_ * (t - jumps_[k - 1].time));
    if (k < 0) return drift_ * t;
    return value_after_[k] + drift_ * (t - jumps_[k].time);
}

double PiecewisePath::infimum(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("PiecewisePath::infimum: t outside [0, horizon]");
    int k = last_jump_before(t);
    double inf_before = (k < 0) ? 0.0 : std::min(inf_up_to_[k], value_after_[k]);
    double tail_start = (k < 0) ? 0.0 : value_after_[k];
    double tail_end = tail_start + drift_ * (t - (k < 0 ? 0.0 : jumps_[k].time));
    return std::min(inf_before, std::min(tail_start, tail_end));
}

double path_infimum(const PiecewisePath& p, double t) { return p.infimum(t); }

void PiecewisePath::write_csv(std::ostream& out) const {
    out << "time,value_left,value_right\n";
    out << 0.0 << ',' << 0.0 << ',' << 0.0 << '\n';
    for (const auto& j : jumps_)
        out << j.time << ',' << value_left(j.time) << ',' << value(j.time) << '\n';
    out << horizon_ << ',' << value_left(horizon_) << ',' << value(horizon_) << '\n';
}

StepFunction::StepFunction(std::vector<double> times, std::vector<double> values,
                           double horizon)
    : times_(std::move(times)), values_(std::move(values)), horizon_(horizon) {
    if (times_.empty() || times_.size() != values_.size())
        throw std::invalid_argument("StepFunction: times/values mismatch");
    if (times_.front() != 0.0)
        throw std::invalid_argument("StepFunction: first breakpoint must be t=0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw std::invalid_argument("StepFunction: breakpoints must increase");
    if (!(horizon_ >= times_.back()))
        throw std::invalid_argument("StepFunction: horizon before last breakpoint");
}

std::size_t StepFunction::segment(double t) const {
    if (t < 0.0 || t > horizon_) throw std::out_of_range("StepFunction: t outside [0, horizon]");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<std::size_t>(it - times_.begin()) - 1;
}

double StepFunction::value(double t) const { return values_[segment(t)]; }

double StepFunction::value_left(double t) const {
    std::size_t s = segment(t);
    if (times_[s] == t && s > 0) return values_[s - 1];
    return values_[s];
}

double StepFunction::min_on(double a, double b) const {
    if (a > b) std::swap(a, b);
    std::size_t lo = segment(a), hi = segment(b);
    double m = values_[lo];
    for (std::size_t i = lo + 1; i <= hi; ++i) m = std::min(m, values_[i]);
    return m;
}

void StepFunction::write_csv(std::ostream& out) const {
    out << "time,value\n";
    for (std::size_t i = 0; i < times_.size(); ++i)
        out << times_[i] << ',' << values_[i] << '\n';
}

} // namespace mulgraph
