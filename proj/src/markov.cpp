#include "mulgraph/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mulgraph/common.hpp"
#include "mulgraph/continuum.hpp"

namespace mulgraph::markov {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MarkedPointMeasure sample_marked_ppm(const Weights& w, double horizon, Rng& rng) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("sample_marked_ppm: horizon must be positive");
    MarkedPointMeasure m;
    m.horizon = horizon;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(1.0);
        if (t > horizon) break;
        m.atoms.push_back({t, rng.discrete(w.values(), w.sigma1()) + 1});
    }
    return m;
}

PiecewisePath markov_load(const MarkedPointMeasure& m, const Weights& w) {
    std::vector<PiecewisePath::Jump> jumps(m.atoms.size());
    for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        const int type = m.atoms[k].type;
        if (type < 1 || type > w.n())
            throw std::invalid_argument("markov_load: atom type outside 1..n");
        jumps[k] = {m.atoms[k].time, w[type - 1]};
    }
    return PiecewisePath(-1.0, std::move(jumps), m.horizon);
}

Colouring colour_clients(const MarkedPointMeasure& m, const Weights& w) {
    const int k = static_cast<int>(m.atoms.size());
    std::vector<queue::LifoArrival> arr(k);
    for (int i = 0; i < k; ++i)
        arr[i] = {m.atoms[i].time, w[m.atoms[i].type - 1], i + 1};
    const queue::LifoResult r = queue::lifo_replay(arr);

    Colouring col;
    col.colour.assign(k, Colour::Blue);
    col.repeat.assign(k, 0);
    col.first_blue.assign(w.n(), -1);
    for (int i = 0; i < k; ++i) {
        const int type = m.atoms[i].type;
        if (col.first_blue[type - 1] >= 0) {
            col.colour[i] = Colour::Red;
            col.repeat[i] = 1;
        } else {
            const int parent = r.parent[i]; // atom id of the served client, 0 if idle
            const Colour c = (parent == 0) ? Colour::Blue : col.colour[parent - 1];
            col.colour[i] = c;
            if (c == Colour::Blue) col.first_blue[type - 1] = i;
        }
    }
    return col;
}

double TimeChange::theta_b(double t) const {
    if (t >= T_star) return kInf;
    const int l = static_cast<int>(std::upper_bound(s.begin(), s.end(), t) - s.begin());
    return t + sprime_before(l);
}

double TimeChange::theta_b_left(double t) const {
    if (t > T_star) return kInf;
    const int l = static_cast<int>(std::lower_bound(s.begin(), s.end(), t) - s.begin());
    return t + sprime_before(l);
}

double TimeChange::lambda_b(double u) const {
    const int L = blocks();
    int F = L; // first unresolved passage
    for (int l = 0; l < L; ++l) {
        if (!(s_prime[l] < kInf)) { F = l; break; }
    }
    // blue block l covers [s_l + s'_l, s_{l+1} + s'_l) on the mixed clock
    int lo = 0, hi = F; // largest l in [0, F] whose blue block starts at or before u
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        const double start = s[mid - 1] + s_prime[mid - 1];
        if (start <= u) lo = mid; else hi = mid - 1;
    }
    const int l = lo;
    const double sp = sprime_before(l);
    if (l == F && F < L) {
        // terminal: the F-th repeat opened a red stretch that never returns
        const double blue_end = s[F] + sp;
        return (u < blue_end) ? u - sp : s[F];
    }
    const double blue_end = (l < L) ? s[l] + sp : kInf;
    if (u < blue_end) return u - sp;
    return s[l]; // inside the red stretch that follows this blue block
}

double rho_w(const Weights& w) {
    continuum::ContinuumParams p;
    p.alpha = 1.0 - w.sigma2() / w.sigma1();
    p.beta = 0.0;
    p.kappa = 1.0 / w.sigma1();
    p.c = w.values();
    p.jmax = w.n();
    return continuum::largest_root(p);
}

Embedding build_embedding(const Weights& w, Rng& rng, int min_blue_types,
                          double min_extent, double mixed_cap) {
    if (!(mixed_cap > 0.0))
        throw std::invalid_argument("build_embedding: mixed_cap must be positive");
    const int n = w.n();
    const int target = (min_blue_types < 0 || min_blue_types > n) ? n : min_blue_types;
    if (target < 1) throw std::invalid_argument("build_embedding: need at least one type");

    // blue measure: sample until `target` distinct types arrived, then keep
    // going until the drain window t_last_fresh + sigma1 (the no-repeat queue
    // cannot stay busy longer than its total service after its last arrival)
    std::vector<MarkedAtom> blue_atoms;
    std::vector<double> first(n, kInf);
    int seen = 0;
    double t = 0.0;
    double window = kInf;
    for (;;) {
        const double next = t + rng.exponential(1.0);
        if (next > window) break;
        t = next;
        const int type = rng.discrete(w.values(), w.sigma1()) + 1;
        blue_atoms.push_back({t, type});
        if (first[type - 1] == kInf) {
            first[type - 1] = t;
            ++seen;
            if (seen >= target) window = std::max(t + w.sigma1(), min_extent);
        }
    }
    const double extent = window;

    Embedding e;
    e.blue = {blue_atoms, extent};
    e.first_arrival = first;

    std::vector<PiecewisePath::Jump> yj;
    for (int j = 0; j < n; ++j)
        if (first[j] < kInf) yj.push_back({first[j], w[j]});
    e.Y = PiecewisePath(-1.0, std::move(yj), extent);

    // repeat times and cumulated repeat weight
    std::vector<double> s_times, s_levels;
    std::vector<int> s_types;
    double acc = 0.0;
    for (const auto& a : blue_atoms) {
        if (a.time > first[a.type - 1]) {
            acc += w[a.type - 1];
            s_times.push_back(a.time);
            s_levels.push_back(acc);
            s_types.push_back(a.type);
        }
    }
    const int L = static_cast<int>(s_times.size());
    {
        std::vector<double> at{0.0}, av{0.0};
        at.insert(at.end(), s_times.begin(), s_times.end());
        av.insert(av.end(), s_levels.begin(), s_levels.end());
        e.A = StepFunction(std::move(at), std::move(av), extent);
    }

    // red first passages, resolved level by level. In the supercritical case
    // finiteness of each extra passage is an exact Bernoulli exp(-rho*delta)
    // (the path restarts from the exact level it hit); a finite stretch is
    // then drawn from the conditioned law, which for a spectrally positive
    // path is the exponential tilt: same unit drift, jump rate of type j
    // scaled by exp(-rho*w_j). No rejection step is involved.
    e.tc.s = s_times;
    e.tc.s_prime.assign(L, kInf);
    e.tc.T_star = kInf;
    const double rho = (classify(w) == Criticality::Supercritical) ? rho_w(w) : 0.0;
    std::vector<double> tilted;
    double tilted_total = 0.0;
    if (rho > 0.0) {
        tilted.resize(n);
        for (int j = 0; j < n; ++j) {
            tilted[j] = (w[j] / w.sigma1()) * std::exp(-rho * w[j]);
            tilted_total += tilted[j];
        }
    }

    std::vector<MarkedAtom> red_atoms;
    std::vector<int> red_stretch; // resolving level index per red atom
    // critical stretches can run to millions of steps; a plain running sum
    // of the red clock drifts by sqrt(steps) ulps, past the 1e-9 identity
    // tolerance, so the clock is accumulated with a Kahan correction
    double rt = 0.0, rt_c = 0.0, rv = 0.0;
    const auto advance_clock = [&rt, &rt_c](double dt) {
        const double y = dt - rt_c;
        const double s = rt + y;
        rt_c = (s - rt) - y;
        rt = s;
    };
    int dead_at = -1;
    int capped_at = -1;           // stretch left unresolved by mixed_cap
    bool cap_after_open = false;  // cap fell inside the stretch, past its opening jump
    for (int l = 0; l < L; ++l) {
        if (s_times[l] + rt > mixed_cap) {
            capped_at = l;
            break;
        }
        const double level = s_levels[l];
        const double delta = level - (l > 0 ? s_levels[l - 1] : 0.0);
        if (rho > 0.0 && !(rng.uniform() < std::exp(-rho * delta))) {
            e.tc.T_star = s_times[l];
            dead_at = l;
            break;
        }
        const double rate = (rho > 0.0) ? tilted_total : 1.0;
        bool hit_cap = false;
        for (;;) {
            const double gap = rng.exponential(rate);
            if (rv - gap <= -level) {
                if (s_times[l] + (rt + (rv + level)) > mixed_cap) {
                    hit_cap = true;
                    break;
                }
                advance_clock(rv + level); // drift from rv down to exactly -level
                rv = -level;
                break;
            }
            if (s_times[l] + (rt + gap) > mixed_cap) {
                hit_cap = true;
                break;
            }
            advance_clock(gap);
            rv -= gap;
            const int type = (rho > 0.0) ? rng.discrete(tilted, tilted_total) + 1
                                         : rng.discrete(w.values(), w.sigma1()) + 1;
            red_atoms.push_back({rt, type});
            red_stretch.push_back(l);
            rv += w[type - 1];
        }
        if (hit_cap) {
            capped_at = l;
            cap_after_open = true;
            break;
        }
        e.tc.s_prime[l] = rt;
    }
    e.red = {red_atoms, rt};

    // mixed path: blue jumps at theta_b(tau), repeat jumps at the left limit
    // (they open the red stretch), red jumps shifted by their repeat time
    double x_horizon;
    if (dead_at >= 0)
        x_horizon = e.tc.T_star + e.tc.sprime_before(dead_at);
    else if (capped_at >= 0)
        x_horizon = mixed_cap;
    else
        x_horizon = extent + e.tc.sprime_before(L);

    struct Tagged {
        double time;
        double size;
        int type;
        JumpOrigin origin;
    };
    std::vector<Tagged> tagged;
    tagged.reserve(blue_atoms.size() + red_atoms.size());
    for (const auto& a : blue_atoms) {
        if (a.time >= e.tc.T_star) continue;
        if (capped_at >= 0) {
            // blue time beyond the unresolved stretch never reaches the mixed
            // clock; the repeat that opened it does iff the cap fell after it
            if (a.time > s_times[capped_at]) continue;
            if (a.time == s_times[capped_at] && !cap_after_open) continue;
        }
        const bool rep = a.time > first[a.type - 1];
        const double real = rep ? e.tc.theta_b_left(a.time) : e.tc.theta_b(a.time);
        if (real > x_horizon) continue; // last blue block can outlive the cap
        tagged.push_back({real, w[a.type - 1], a.type,
                          rep ? JumpOrigin::RepeatBlue : JumpOrigin::Blue});
    }
    for (std::size_t k = 0; k < red_atoms.size(); ++k) {
        const double real = s_times[red_stretch[k]] + red_atoms[k].time;
        tagged.push_back({real, w[red_atoms[k].type - 1], red_atoms[k].type, JumpOrigin::Red});
    }
    std::sort(tagged.begin(), tagged.end(),
              [](const Tagged& a, const Tagged& b) { return a.time < b.time; });

    std::vector<PiecewisePath::Jump> xj(tagged.size());
    e.x_types.resize(tagged.size());
    e.x_origin.resize(tagged.size());
    for (std::size_t k = 0; k < tagged.size(); ++k) {
        xj[k] = {tagged[k].time, tagged[k].size};
        e.x_types[k] = tagged[k].type;
        e.x_origin[k] = tagged[k].origin;
    }
    e.X = PiecewisePath(-1.0, std::move(xj), x_horizon);
    return e;
}

StepFunction markov_height(const PiecewisePath& x) { return queue::height_process(x); }

std::vector<double> offspring_pmf(const Weights& w, int kmax) {
    if (kmax < 0) throw std::invalid_argument("offspring_pmf: kmax must be >= 0");
    std::vector<double> pmf(kmax + 2, 0.0);
    for (int j = 0; j < w.n(); ++j) {
        double term = w[j] * std::exp(-w[j]) / w.sigma1(); // k = 0 contribution
        for (int k = 0; k <= kmax; ++k) {
            pmf[k] += term;
            term *= w[j] / static_cast<double>(k + 1);
        }
    }
    double head = 0.0;
    for (int k = 0; k <= kmax; ++k) head += pmf[k];
    pmf[kmax + 1] = std::max(0.0, 1.0 - head);
    return pmf;
}

std::vector<NodeCensus> gw_children_census(const MarkedPointMeasure& m, const Weights& w,
                                           const Colouring& col) {
    if (classify(w) == Criticality::Supercritical)
        throw std::invalid_argument("gw_children_census: supercritical weights rejected");
    const int k = static_cast<int>(m.atoms.size());
    if (static_cast<int>(col.colour.size()) != k)
        throw std::invalid_argument("gw_children_census: colouring does not match measure");
    std::vector<queue::LifoArrival> arr(k);
    for (int i = 0; i < k; ++i)
        arr[i] = {m.atoms[i].time, w[m.atoms[i].type - 1], i + 1};
    const queue::LifoResult r = queue::lifo_replay(arr);

    std::vector<int> kids(k, 0);
    for (int i = 0; i < k; ++i)
        if (r.parent[i] > 0) ++kids[r.parent[i] - 1];
    std::vector<NodeCensus> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i)
        if (r.departure[i] <= m.horizon) out.push_back({kids[i], col.colour[i]});
    return out;
}

MarkedPointMeasure mixed_measure(const Embedding& e) {
    MarkedPointMeasure m;
    m.horizon = e.X.horizon();
    m.atoms.resize(e.x_types.size());
    for (std::size_t k = 0; k < e.x_types.size(); ++k)
        m.atoms[k] = {e.X.jumps()[k].time, e.x_types[k]};
    return m;
}

EmbeddingCheck check_embedding(const Embedding& e, double tol) {
    EmbeddingCheck out;
    const StepFunction Hw = queue::height_process(e.Y);
    const StepFunction Hx = markov_height(e.X);
    const double cap = std::min(e.tc.T_star, e.blue.horizon);
    for (const auto& a : e.blue.atoms) {
        if (!(a.time < cap)) continue;
        const bool rep = a.time > e.first_arrival[a.type - 1];
        // A repeat maps to the closing instant of its red stretch, where the
        // replayed departure sits within a few ulps of theta_b; query the
        // opening boundary instead, which is an exact jump time of X.
        const double u = rep ? e.tc.theta_b_left(a.time) : e.tc.theta_b(a.time);
        if (!(u <= e.X.horizon())) continue; // never expected; guards the scan
        ++out.events_checked;
        const double xv = rep ? e.X.value_left(u) : e.X.value(u);
        const double dv = std::abs(e.Y.value(a.time) - xv);
        out.max_value_err = std::max(out.max_value_err, dv);
        if (dv > tol) ++out.value_violations;
        const double want_h = Hw.value(a.time) + (rep ? 1.0 : 0.0);
        if (want_h != Hx.value(u)) ++out.height_violations;
    }
    for (int l = 0; l < e.tc.blocks(); ++l) {
        if (!(e.tc.s_prime[l] < kInf)) break;
        const double open_time = e.tc.s[l] + e.tc.sprime_before(l);
        const double close_time = e.tc.s[l] + e.tc.s_prime[l];
        if (close_time > e.X.horizon()) break;
        if (std::abs(e.X.value_left(open_time) - e.X.value(close_time)) > tol)
            ++out.block_violations;
    }
    return out;
}

} // namespace mulgraph::markov
