#include "mulgraph/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mulgraph/common.hpp"
#include "mulgraph/numeric.hpp"

namespace mulgraph::continuum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Partial sum of j^{-s} for j = 1..m, m possibly far beyond anything
// summable term by term. Exact up to an integer cutoff, Euler-Maclaurin
// remainder past it. Valid for s > 0, s != 1; m need not be small.
double partial_pow_sum(double s, double m) {
    double mf = std::floor(m);
    if (mf < 1.0) return 0.0;
    const double cut = 100000.0;
    double k = std::min(mf, cut);
    double head = 0.0;
    for (long j = 1; j <= static_cast<long>(k); ++j)
        head += std::pow(static_cast<double>(j), -s);
    if (mf <= cut) return head;
    // sum over (k, mf]: integral + endpoint + first derivative correction
    auto f = [&](double x) { return std::pow(x, -s); };
    double integral = (s == 1.0) ? std::log(mf / k)
                                 : (std::pow(mf, 1.0 - s) - std::pow(k, 1.0 - s)) / (1.0 - s);
    double tail = integral - 0.5 * f(k) + 0.5 * f(mf)
        + (s / 12.0) * (std::pow(k, -s - 1.0) - std::pow(mf, -s - 1.0));
    return head + tail;
}

// Sum of j^{-s} over j > k0 for s > 1.
double tail_pow_sum(double s, double k0) {
    if (s <= 1.0) return kInf;
    const double cut = 100000.0;
    double head = 0.0;
    double k = std::max(k0, 0.0);
    if (k < cut) {
        for (long j = static_cast<long>(k) + 1; j <= static_cast<long>(cut); ++j)
            head += std::pow(static_cast<double>(j), -s);
        k = cut;
    }
    return head + std::pow(k, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(k, -s)
        + (s / 12.0) * std::pow(k, -s - 1.0);
}

// e^{-x} - 1 + x without cancellation for small x >= 0
double compensated_exp(double x) {
    if (x < 1e-3) {
        double x2 = x * x;
        return 0.5 * x2 * (1.0 - x / 3.0 + x2 / 12.0 - x2 * x / 60.0);
    }
    return std::expm1(-x) + x;
}

// Jump landing cell: a jump at time t moves values[k] for the first grid
// point at or after t.
long jump_cell(double t, double dt, long steps) {
    long k = static_cast<long>(std::ceil(t / dt - 1e-12));
    return std::clamp(k, 1L, steps);
}

double window_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                    std::size_t lo, std::size_t hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

double ContinuumParams::c_at(long j) const {
    if (j < 1) throw std::invalid_argument("c_at: index starts at 1");
    if (powerlaw()) return power_q * std::pow(static_cast<double>(j), -1.0 / power_rho);
    if (j <= static_cast<long>(c.size())) return c[static_cast<std::size_t>(j - 1)];
    return 0.0;
}

int ContinuumParams::effective_jmax() const {
    if (!powerlaw()) {
        int n = static_cast<int>(c.size());
        return (jmax > 0) ? std::min(jmax, n) : n;
    }
    if (jmax > 0) return jmax;
    // grow until the dropped cube tail keeps the L2 truncation error of a
    // horizon-long path under 1e-4, hard capped to keep simulation feasible
    const int cap = 200000;
    int j = 1024;
    while (j < cap) {
        double tail = kappa * sigma_tail(*this, 3.0, j) * horizon;
        if (tail < 1e-4) break;
        j *= 2;
    }
    return std::min(j, cap);
}

bool ContinuumParams::infinite_variation() const {
    if (beta > 0.0) return true;
    return powerlaw() && power_rho >= 2.0;
}

void validate(const ContinuumParams& p) {
    if (!(p.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (p.beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(p.horizon >= p.dt)) throw std::invalid_argument("horizon shorter than one step");
    if (p.jmax < 0) throw std::invalid_argument("jmax must be nonnegative");
    if (p.powerlaw() && !p.c.empty())
        throw std::invalid_argument("explicit sizes and a power-law rule are exclusive");
    if (p.powerlaw()) {
        if (!(p.power_q > 0.0)) throw std::invalid_argument("power_q must be positive");
        if (!(p.power_rho < 3.0))
            throw std::invalid_argument("power_rho must stay below 3: the cube sum diverges");
    } else {
        for (std::size_t i = 0; i < p.c.size(); ++i) {
            if (!(p.c[i] > 0.0)) throw std::invalid_argument("jump sizes must be positive");
            if (i > 0 && p.c[i] > p.c[i - 1] + 1e-15)
                throw std::invalid_argument("jump sizes must be non-increasing");
        }
    }
    // partial cube sums must look Cauchy under the active rule
    double a = sigma_head(p, 3.0, 50000);
    double b = a + sigma_tail(p, 3.0, 50000);
    if (!std::isfinite(b) || (a > 0.0 && (b - a) > 0.5 * a && b > 1e6))
        throw std::invalid_argument("cube sum does not converge");
}

double sigma_head(const ContinuumParams& p, double r, long upto) {
    if (upto < 1) return 0.0;
    if (p.powerlaw())
        return std::pow(p.power_q, r) * partial_pow_sum(r / p.power_rho, static_cast<double>(upto));
    long n = std::min<long>(upto, static_cast<long>(p.c.size()));
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (long j = 1; j <= n; ++j)
        terms[static_cast<std::size_t>(j - 1)] = std::pow(p.c[static_cast<std::size_t>(j - 1)], r);
    return numeric::pairwise_sum(terms);
}

double sigma_tail(const ContinuumParams& p, double r, long from_j) {
    if (!p.powerlaw()) {
        long n = static_cast<long>(p.c.size());
        if (from_j >= n) return 0.0;
        return sigma_head(p, r, n) - sigma_head(p, r, from_j);
    }
    return std::pow(p.power_q, r) * tail_pow_sum(r / p.power_rho, static_cast<double>(from_j));
}

double psi_eval(const ContinuumParams& p, double lam) {
    if (lam < 0.0) throw std::invalid_argument("psi is defined for lam >= 0");
    int jm = p.effective_jmax();
    std::vector<double> terms(static_cast<std::size_t>(jm));
    for (int j = 1; j <= jm; ++j) {
        double cj = p.c_at(j);
        terms[static_cast<std::size_t>(j - 1)] = cj * compensated_exp(lam * cj);
    }
    return p.alpha * lam + 0.5 * p.beta * lam * lam + p.kappa * numeric::pairwise_sum(terms);
}

double psi_tail_bound(const ContinuumParams& p, double lam) {
    return 0.5 * p.kappa * lam * lam * sigma_tail(p, 3.0, p.effective_jmax());
}

double largest_root(const ContinuumParams& p) {
    if (p.alpha >= 0.0) return 0.0;
    double hi = 1.0;
    while (psi_eval(p, hi) <= 0.0) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (psi_eval(p, mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double psi_inverse(const ContinuumParams& p, double lam) {
    if (lam < 0.0) throw std::invalid_argument("psi_inverse needs lam >= 0");
    double rho = largest_root(p);
    if (lam == 0.0) return rho;
    double hi = std::max(rho, 1.0);
    while (psi_eval(p, hi) <= lam) hi *= 2.0;
    double lo = rho;
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(hi, 1.0); ++it) {
        double mid = 0.5 * (lo + hi);
        (psi_eval(p, mid) <= lam ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

long GridPath::index_of(double t) const {
    long i = static_cast<long>(std::floor(t / dt + 1e-9));
    return std::clamp(i, 0L, steps());
}

YAPath simulate_Y(const ContinuumParams& p, Rng& rng) {
    validate(p);
    long n = static_cast<long>(std::ceil(p.horizon / p.dt - 1e-9));
    double T = static_cast<double>(n) * p.dt;
    int jm = p.effective_jmax();
    double sig2 = sigma_head(p, 2.0, jm);

    YAPath out;
    out.Y.dt = out.A.dt = p.dt;
    out.Y.values.assign(static_cast<std::size_t>(n + 1), 0.0);
    out.A.values.assign(static_cast<std::size_t>(n + 1), 0.0);
    out.first_jump.assign(static_cast<std::size_t>(jm), kInf);

    std::vector<double> ybucket(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<double> abucket(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<std::pair<double, double>> yj, aj;
    for (int j = 1; j <= jm; ++j) {
        double cj = p.c_at(j);
        double rate = p.kappa * cj;
        double t = rng.exponential(rate);
        if (t > T) continue;
        out.first_jump[static_cast<std::size_t>(j - 1)] = t;
        ybucket[static_cast<std::size_t>(jump_cell(t, p.dt, n))] += cj;
        yj.emplace_back(t, cj);
        for (t += rng.exponential(rate); t <= T; t += rng.exponential(rate)) {
            abucket[static_cast<std::size_t>(jump_cell(t, p.dt, n))] += cj;
            aj.emplace_back(t, cj);
        }
    }

    double drift = (-p.alpha - p.kappa * sig2) * p.dt;
    double bsd = (p.beta > 0.0) ? std::sqrt(p.beta * p.dt) : 0.0;
    for (long i = 0; i < n; ++i) {
        double t0 = static_cast<double>(i) * p.dt;
        double t1 = static_cast<double>(i + 1) * p.dt;
        double quad = 0.5 * p.kappa * p.beta * (t1 * t1 - t0 * t0);
        double gauss = (bsd > 0.0) ? bsd * rng.normal() : 0.0;
        out.Y.values[static_cast<std::size_t>(i + 1)] =
            out.Y.values[static_cast<std::size_t>(i)] + drift - quad + gauss +
            ybucket[static_cast<std::size_t>(i + 1)];
        out.A.values[static_cast<std::size_t>(i + 1)] =
            out.A.values[static_cast<std::size_t>(i)] + quad +
            abucket[static_cast<std::size_t>(i + 1)];
    }

    auto commit = [](std::vector<std::pair<double, double>>& src, GridPath& g) {
        std::sort(src.begin(), src.end());
        g.jump_times.reserve(src.size());
        g.jump_sizes.reserve(src.size());
        for (auto& [t, s] : src) {
            g.jump_times.push_back(t);
            g.jump_sizes.push_back(s);
        }
    };
    commit(yj, out.Y);
    commit(aj, out.A);
    return out;
}

GridPath simulate_levy(const ContinuumParams& p, Rng& rng) {
    validate(p);
    long n = static_cast<long>(std::ceil(p.horizon / p.dt - 1e-9));
    double T = static_cast<double>(n) * p.dt;
    int jm = p.effective_jmax();
    double sig2 = sigma_head(p, 2.0, jm);

    GridPath x;
    x.dt = p.dt;
    x.values.assign(static_cast<std::size_t>(n + 1), 0.0);

    std::vector<double> bucket(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<std::pair<double, double>> js;
    for (int j = 1; j <= jm; ++j) {
        double cj = p.c_at(j);
        double rate = p.kappa * cj;
        for (double t = rng.exponential(rate); t <= T; t += rng.exponential(rate)) {
            bucket[static_cast<std::size_t>(jump_cell(t, p.dt, n))] += cj;
            js.emplace_back(t, cj);
        }
    }

    double drift = (-p.alpha - p.kappa * sig2) * p.dt;
    double bsd = (p.beta > 0.0) ? std::sqrt(p.beta * p.dt) : 0.0;
    for (long i = 0; i < n; ++i) {
        double gauss = (bsd > 0.0) ? bsd * rng.normal() : 0.0;
        x.values[static_cast<std::size_t>(i + 1)] =
            x.values[static_cast<std::size_t>(i)] + drift + gauss +
            bucket[static_cast<std::size_t>(i + 1)];
    }

    std::sort(js.begin(), js.end());
    x.jump_times.reserve(js.size());
    x.jump_sizes.reserve(js.size());
    for (auto& [t, s] : js) {
        x.jump_times.push_back(t);
        x.jump_sizes.push_back(s);
    }

    // exact within-step infima: conditionally on its endpoints a continuous
    // stretch is a Brownian bridge, whose minimum has the explicit tail
    // P(min <= m) = exp(-2(a-m)(b-m)/(beta L)). Steps holding jumps are split
    // at the jump times, with the bridge sampled at each split point first.
    x.step_min.resize(static_cast<std::size_t>(n));
    const auto stretch_min = [&](double a, double b, double L) {
        double m = std::min(a, b);
        if (p.beta > 0.0 && L > 0.0) {
            const double d = a - b;
            const double r = d * d - 2.0 * p.beta * L * std::log(rng.uniform());
            m = std::min(m, 0.5 * (a + b - std::sqrt(r)));
        }
        return m;
    };
    std::size_t jk = 0;
    for (long i = 0; i < n; ++i) {
        const double v0 = x.values[static_cast<std::size_t>(i)];
        const double v1 = x.values[static_cast<std::size_t>(i + 1)];
        if (jk >= js.size() || jump_cell(js[jk].first, p.dt, n) != i + 1) {
            x.step_min[static_cast<std::size_t>(i)] = stretch_min(v0, v1, p.dt);
            continue;
        }
        std::size_t jend = jk;
        double csum = 0.0;
        while (jend < js.size() && jump_cell(js[jend].first, p.dt, n) == i + 1)
            csum += js[jend++].second;
        // jumps removed, the step runs from d0 to d1; replace them stretch by
        // stretch, tracking the mass already landed
        const double d1 = v1 - csum;
        const double t0 = static_cast<double>(i) * p.dt;
        double prev_t = t0, prev_d = v0, landed = 0.0;
        double lo = v1;
        for (; jk < jend; ++jk) {
            const double rem = std::max(0.0, (t0 + p.dt) - prev_t);
            const double len = std::clamp(js[jk].first - prev_t, 0.0, rem);
            double dmid;
            if (len >= rem) {
                dmid = d1;
            } else {
                const double frac = len / rem;
                dmid = prev_d + (d1 - prev_d) * frac;
                if (p.beta > 0.0 && len > 0.0)
                    dmid += rng.normal() * std::sqrt(p.beta * len * (rem - len) / rem);
            }
            lo = std::min(lo, stretch_min(prev_d + landed, dmid + landed, len));
            landed += js[jk].second;
            prev_t = js[jk].first;
            prev_d = dmid;
        }
        lo = std::min(lo, stretch_min(prev_d + landed, v1, (t0 + p.dt) - prev_t));
        x.step_min[static_cast<std::size_t>(i)] = std::min(lo, std::min(v0, v1));
    }
    return x;
}

BlueTimeChange theta_blue(const GridPath& a, const GridPath& xr, double escape_margin) {
    if (std::abs(a.dt - xr.dt) > 1e-15 * std::max(a.dt, xr.dt))
        throw std::invalid_argument("theta_blue: grids must share dt");
    long na = a.steps();
    long nr = xr.steps();
    std::vector<double> rm(static_cast<std::size_t>(nr + 1));
    rm[0] = xr.values[0];
    for (long i = 1; i <= nr; ++i)
        rm[static_cast<std::size_t>(i)] =
            std::min(rm[static_cast<std::size_t>(i - 1)], xr.values[static_cast<std::size_t>(i)]);

    BlueTimeChange tc;
    tc.theta_idx.assign(static_cast<std::size_t>(na + 1), -1);
    tc.T_star = kInf;
    long r = 0;
    for (long i = 0; i <= na; ++i) {
        double level = a.values[static_cast<std::size_t>(i)];
        while (r <= nr && rm[static_cast<std::size_t>(r)] > -level) ++r;
        if (r > nr) {
            // depth never reached on this red path; decide between a genuine
            // escape and a horizon that was simply too short
            double rise = xr.values[static_cast<std::size_t>(nr)] - rm[static_cast<std::size_t>(nr)];
            if (std::isfinite(escape_margin) && rise > escape_margin) {
                tc.T_star = static_cast<double>(i) * a.dt;
                return tc;
            }
            throw ExtendHorizon("red path ended above the required depth");
        }
        tc.theta_idx[static_cast<std::size_t>(i)] = i + r;
    }
    return tc;
}

AssembledX assemble_mixed(const YAPath& ya, const GridPath& xr, double escape_margin) {
    AssembledX out;
    BlueTimeChange tc = theta_blue(ya.A, xr, escape_margin);
    out.theta_idx = tc.theta_idx;
    out.T_star = tc.T_star;
    double dt = ya.Y.dt;
    out.X.dt = dt;

    long nb_last = -1;
    for (long i = 0; i < static_cast<long>(tc.theta_idx.size()); ++i)
        if (tc.theta_idx[static_cast<std::size_t>(i)] >= 0) nb_last = i;
    if (nb_last < 1) {
        out.X.values.assign(1, 0.0);
        return out;
    }

    long m = tc.theta_idx[static_cast<std::size_t>(nb_last)];
    out.X.values.assign(static_cast<std::size_t>(m + 1), 0.0);
    out.is_blue.assign(static_cast<std::size_t>(m), 0);

    std::vector<std::pair<double, double>> jumps;
    std::size_t rj = 0; // pointer into the red jump registry

    for (long bi = 0; bi < nb_last; ++bi) {
        long u0 = tc.theta_idx[static_cast<std::size_t>(bi)];
        long u1 = tc.theta_idx[static_cast<std::size_t>(bi + 1)];
        long g0 = u0 - bi;
        long g1 = u1 - (bi + 1);
        double ybi = ya.Y.values[static_cast<std::size_t>(bi)];
        double da = ya.A.values[static_cast<std::size_t>(bi + 1)] -
                    ya.A.values[static_cast<std::size_t>(bi)];
        double xr0 = xr.values[static_cast<std::size_t>(g0)];
        for (long k = 1; k < u1 - u0; ++k)
            out.X.values[static_cast<std::size_t>(u0 + k)] =
                ybi + da + (xr.values[static_cast<std::size_t>(g0 + k)] - xr0);
        out.X.values[static_cast<std::size_t>(u1)] =
            ya.Y.values[static_cast<std::size_t>(bi + 1)];
        out.is_blue[static_cast<std::size_t>(u1 - 1)] = 1;

        if (da > 0.0)
            jumps.emplace_back(static_cast<double>(u0 + 1) * dt, da);
        double rlo = static_cast<double>(g0) * dt;
        double rhi = static_cast<double>(g1) * dt;
        while (rj < xr.jump_times.size() && xr.jump_times[rj] <= rhi + 1e-12 * dt) {
            if (xr.jump_times[rj] > rlo)
                jumps.emplace_back(xr.jump_times[rj] + static_cast<double>(bi) * dt,
                                   xr.jump_sizes[rj]);
            ++rj;
        }
    }
    for (std::size_t k = 0; k < ya.Y.jump_times.size(); ++k) {
        double t = ya.Y.jump_times[k];
        long ci = jump_cell(t, dt, static_cast<long>(ya.Y.values.size()) - 1);
        if (ci > nb_last) continue;
        long shift = tc.theta_idx[static_cast<std::size_t>(ci)] - ci;
        jumps.emplace_back(t + static_cast<double>(shift) * dt, ya.Y.jump_sizes[k]);
    }
    std::sort(jumps.begin(), jumps.end());
    out.X.jump_times.reserve(jumps.size());
    out.X.jump_sizes.reserve(jumps.size());
    for (auto& [t, s] : jumps) {
        out.X.jump_times.push_back(t);
        out.X.jump_sizes.push_back(s);
    }
    return out;
}

double q_of_eps(const ContinuumParams& p, double eps) {
    if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
    if (!p.powerlaw()) {
        double s = 0.0;
        for (double cj : p.c)
            if (cj > eps) s += cj * (cj - eps);
        return p.kappa * s;
    }
    if (eps <= 0.0) {
        double s2 = (p.power_rho < 2.0) ? sigma_head(p, 2.0, p.effective_jmax())
                                        + sigma_tail(p, 2.0, p.effective_jmax())
                                        : kInf;
        return p.kappa * s2;
    }
    double jx = std::pow(p.power_q / eps, p.power_rho);
    double s2 = std::pow(p.power_q, 2.0) * partial_pow_sum(2.0 / p.power_rho, jx);
    double s1 = p.power_q * partial_pow_sum(1.0 / p.power_rho, jx);
    return p.kappa * (s2 - eps * s1);
}

HeightEstimates height_estimators(const ContinuumParams& p, const GridPath& x,
                                  double t, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    HeightEstimates out;
    out.q_eps = q_of_eps(p, eps);
    out.lebesgue_valid = p.beta > 0.0;
    out.record_valid = out.q_eps > 1e-12;

    long it = x.index_of(t);
    if (it <= 0) return out;

    // jumps grouped by landing cell, consumed while scanning backwards
    std::vector<std::pair<long, double>> cell_jumps;
    for (std::size_t k = 0; k < x.jump_times.size(); ++k) {
        if (x.jump_times[k] > t + 1e-12 * x.dt) break;
        cell_jumps.emplace_back(jump_cell(x.jump_times[k], x.dt, x.steps()), x.jump_sizes[k]);
    }
    std::sort(cell_jumps.begin(), cell_jumps.end());
    long jp = static_cast<long>(cell_jumps.size()) - 1;

    // With exact within-step infima the running minimum is the true one and
    // the band needs no adjustment. On bare grid values the minimum sits
    // above the continuous one by 0.5826 sqrt(beta dt) on average (the
    // discrete-monitoring gap), which widens the counted band by the same
    // amount; shrink the threshold to compensate. At eps near sqrt(beta dt)
    // the uncorrected count runs ~60% hot.
    const bool exact_min = x.step_min.size() == static_cast<std::size_t>(x.steps());
    const double gap =
        exact_min ? 0.0 : 0.5825971 * std::sqrt(p.beta * x.dt);
    const double band = std::max(0.0, eps - gap);

    double m = x.values[static_cast<std::size_t>(it)];
    double occ = 0.0, gaps = 0.0;
    long rec = 0;
    while (jp >= 0 && cell_jumps[static_cast<std::size_t>(jp)].first > it) --jp;
    for (; jp >= 0 && cell_jumps[static_cast<std::size_t>(jp)].first == it; --jp) {
        double pre = m - cell_jumps[static_cast<std::size_t>(jp)].second;
        gaps += std::max(0.0, m - pre);
        if (pre + eps < m) ++rec;
    }
    for (long s = it - 1; s >= 0; --s) {
        double v = x.values[static_cast<std::size_t>(s)];
        if (exact_min) {
            // the step starting at s belongs to [s, t], so its dip counts
            m = std::min(m, x.step_min[static_cast<std::size_t>(s)]);
            if (v - m <= band) occ += x.dt;
        } else {
            if (v - m <= band) occ += x.dt;
            m = std::min(m, v);
        }
        for (; jp >= 0 && cell_jumps[static_cast<std::size_t>(jp)].first == s; --jp) {
            double pre = v - cell_jumps[static_cast<std::size_t>(jp)].second;
            gaps += std::max(0.0, m - pre);
            if (pre + eps < m) ++rec;
        }
    }

    out.occupation = occ / eps;
    if (out.lebesgue_valid) {
        // on bare grid values the monitoring gap also hides the tail of the
        // record range below the grid minimum; put it back
        out.lebesgue = (2.0 / p.beta) *
            std::max(0.0, (x.values[static_cast<std::size_t>(it)] - m) + gap - gaps);
    }
    if (out.record_valid)
        out.record_count = static_cast<double>(rec) / out.q_eps;
    return out;
}

ContinuumHeight continuum_height_of_Y(const ContinuumParams& p, const YAPath& ya,
                                      const GridPath& xr, double eps,
                                      double escape_margin) {
    AssembledX mix = assemble_mixed(ya, xr, escape_margin);
    ContinuumHeight out;
    out.T_star = mix.T_star;
    out.H.assign(ya.Y.values.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < mix.theta_idx.size() && i < out.H.size(); ++i) {
        long u = mix.theta_idx[i];
        if (u < 0) break;
        HeightEstimates est =
            height_estimators(p, mix.X, static_cast<double>(u) * mix.X.dt, eps);
        out.H[i] = (est.lebesgue_valid) ? est.lebesgue : est.occupation;
    }
    return out;
}

double grid_reflected_area(const GridPath& y) {
    long n = y.steps();
    double rm = y.values[0];
    double area = 0.0;
    double prev_gap = 0.0;
    for (long i = 1; i <= n; ++i) {
        rm = std::min(rm, y.values[static_cast<std::size_t>(i)]);
        double gap = y.values[static_cast<std::size_t>(i)] - rm;
        area += 0.5 * (prev_gap + gap) * y.dt;
        prev_gap = gap;
    }
    return area;
}

queue::PinchSet sample_continuum_pinches(const GridPath& y, double kappa, Rng& rng) {
    queue::PinchSet out;
    long n = y.steps();
    if (n < 1) return out;

    std::vector<double> rm(static_cast<std::size_t>(n + 1));
    rm[0] = y.values[0];
    for (long i = 1; i <= n; ++i)
        rm[static_cast<std::size_t>(i)] =
            std::min(rm[static_cast<std::size_t>(i - 1)], y.values[static_cast<std::size_t>(i)]);

    // per-cell trapezoid areas of the reflected path, then a prefix table
    // for inverse sampling
    std::vector<double> prefix(static_cast<std::size_t>(n + 1), 0.0);
    for (long i = 0; i < n; ++i) {
        double g0 = y.values[static_cast<std::size_t>(i)] - rm[static_cast<std::size_t>(i)];
        double g1 = y.values[static_cast<std::size_t>(i + 1)] - rm[static_cast<std::size_t>(i + 1)];
        prefix[static_cast<std::size_t>(i + 1)] =
            prefix[static_cast<std::size_t>(i)] + 0.5 * (g0 + g1) * y.dt;
    }
    double total = prefix[static_cast<std::size_t>(n)];
    if (total <= 0.0) return out;

    int count = rng.poisson(kappa * total);
    numeric::SparseMin rmq(y.values);
    std::vector<std::pair<double, double>> atoms;
    for (int a = 0; a < count; ++a) {
        double u = rng.uniform(0.0, total);
        long cell = static_cast<long>(
            std::upper_bound(prefix.begin(), prefix.end(), u) - prefix.begin()) - 1;
        cell = std::clamp(cell, 0L, n - 1);
        double g0 = y.values[static_cast<std::size_t>(cell)] - rm[static_cast<std::size_t>(cell)];
        double g1 = y.values[static_cast<std::size_t>(cell + 1)] - rm[static_cast<std::size_t>(cell + 1)];
        double target = (u - prefix[static_cast<std::size_t>(cell)]) / y.dt;
        double frac;
        if (std::abs(g1 - g0) < 1e-12 * std::max(g0, g1)) {
            frac = (g0 > 0.0) ? target / g0 : 0.5;
        } else {
            frac = (-g0 + std::sqrt(std::max(0.0, g0 * g0 + 2.0 * (g1 - g0) * target))) / (g1 - g0);
        }
        frac = std::clamp(frac, 0.0, 1.0);
        double tp = (static_cast<double>(cell) + frac) * y.dt;
        double gap = g0 + (g1 - g0) * frac;
        if (gap <= 0.0) continue;
        atoms.emplace_back(tp, rng.uniform(0.0, gap));
    }
    std::sort(atoms.begin(), atoms.end());

    for (auto& [tp, yp] : atoms) {
        long ip = y.index_of(tp);
        double level = yp + rm[static_cast<std::size_t>(ip)];
        if (y.values[static_cast<std::size_t>(ip)] <= level) continue;
        // earliest s with a strict minimum above the pinch level on [s, ip]
        long lo = 0, hi = ip;
        while (lo < hi) {
            long mid = lo + (hi - lo) / 2;
            if (rmq.query(static_cast<std::size_t>(mid), static_cast<std::size_t>(ip)) > level)
                hi = mid;
            else
                lo = mid + 1;
        }
        out.atoms.emplace_back(tp, yp);
        out.pairs.emplace_back(static_cast<double>(lo) * y.dt, tp);
    }
    return out;
}

LaplaceReport excursion_laplace_check(const ContinuumParams& p, double lam,
                                      int trials, Rng& rng, double depth_per_trial) {
    validate(p);
    if (p.alpha < 0.0)
        throw std::invalid_argument("excursion check needs (sub)critical parameters");
    if (lam <= 0.0) throw std::invalid_argument("lam must be positive");

    int jm = p.effective_jmax();
    std::vector<double> rates(static_cast<std::size_t>(jm));
    double total_rate = 0.0;
    for (int j = 1; j <= jm; ++j) {
        rates[static_cast<std::size_t>(j - 1)] = p.kappa * p.c_at(j);
        total_rate += rates[static_cast<std::size_t>(j - 1)];
    }
    double sig2 = sigma_head(p, 2.0, jm);
    double drift = (-p.alpha - p.kappa * sig2) * p.dt;
    double bsd = (p.beta > 0.0) ? std::sqrt(p.beta * p.dt) : 0.0;
    double pjump = total_rate * p.dt;
    if (pjump > 0.1)
        throw std::invalid_argument("dt too coarse for the total jump rate");

    LaplaceReport rep;
    rep.lambda = lam;
    const long step_cap = 4000000;
    double sum = 0.0, depth = 0.0;
    long count = 0;
    for (int tr = 0; tr < trials; ++tr) {
        double v = 0.0, inf = 0.0;
        long start = -1;
        // a trial must stop at a record time: stopping inside an excursion
        // would drop a length-biased excursion and skew the sum low, so past
        // the cap the walk keeps going until the open excursion closes
        for (long i = 1; i <= 10 * step_cap; ++i) {
            v += drift;
            if (bsd > 0.0) v += bsd * rng.normal();
            if (pjump > 0.0 && rng.uniform() < pjump)
                v += p.c_at(1 + static_cast<long>(rng.discrete(rates, total_rate)));
            if (v < inf) {
                if (start >= 0) {
                    double zeta = static_cast<double>(i - start) * p.dt;
                    sum += 1.0 - std::exp(-lam * zeta);
                    ++count;
                    start = -1;
                }
                inf = v;
                if (inf <= -depth_per_trial || i > step_cap) break;
            } else if (start < 0 && v > inf) {
                start = i;
            }
        }
        depth += -inf;
    }
    rep.excursions = count;
    rep.depth = depth;
    rep.estimate = (depth > 0.0) ? sum / depth : 0.0;
    rep.target = psi_inverse(p, lam);
    rep.rel_err = std::abs(rep.estimate - rep.target) / std::max(rep.target, 1e-300);
    return rep;
}

double v_of_a(const ContinuumParams& p, double a) {
    validate(p);
    if (a <= 0.0) throw std::invalid_argument("a must be positive");
    if (!(p.beta > 0.0))
        throw std::invalid_argument(
            "v_of_a needs beta > 0: with a truncated jump list psi grows "
            "linearly and the upper integral diverges");
    double rho = largest_root(p);
    // integral of 1/psi over (v, infinity) via lam = v/u, u in (0, 1]
    auto tail_integral = [&](double v) {
        auto f = [&](double u) {
            if (u <= 0.0) return 2.0 / (p.beta * v);
            double lam = v / u;
            return v / (u * u * psi_eval(p, lam));
        };
        return numeric::adaptive_simpson(f, 0.0, 1.0, 1e-12);
    };
    double vlo = rho + 1.0;
    while (tail_integral(vlo) < a) vlo = rho + 0.5 * (vlo - rho);
    double vhi = vlo;
    while (tail_integral(vhi) >= a) vhi = rho + 2.0 * (vhi - rho);
    for (int it = 0; it < 200 && (vhi - vlo) > 1e-12 * vhi; ++it) {
        double mid = 0.5 * (vlo + vhi);
        (tail_integral(mid) >= a ? vlo : vhi) = mid;
    }
    return 0.5 * (vlo + vhi);
}

ExtinctionReport extinction_check(const ContinuumParams& p, double x, double a,
                                  int trials, Rng& rng) {
    validate(p);
    if (!(p.beta > 0.0) || !p.c.empty() || p.powerlaw())
        throw std::invalid_argument("extinction check covers the Brownian case only");
    if (x <= 0.0 || a <= 0.0) throw std::invalid_argument("x and a must be positive");

    ExtinctionReport rep;
    rep.trials = trials;
    rep.target = std::exp(-x * v_of_a(p, a));

    // height barrier a translates to X - I <= a*beta/2; a Brownian bridge
    // term catches within-step crossings
    double bar_gap = 0.5 * a * p.beta;
    double bsd = std::sqrt(p.beta * p.dt);
    double drift = -p.alpha * p.dt;
    int ok = 0;
    for (int tr = 0; tr < trials; ++tr) {
        double v = 0.0, inf = 0.0;
        bool crossed = false;
        while (!crossed && inf > -x) {
            double nxt = v + drift + bsd * rng.normal();
            double bar = inf + bar_gap;
            if (v >= bar || nxt >= bar) {
                crossed = true;
                break;
            }
            double pb = std::exp(-2.0 * (bar - v) * (bar - nxt) / (p.beta * p.dt));
            if (rng.uniform() < pb) {
                crossed = true;
                break;
            }
            v = nxt;
            inf = std::min(inf, v);
        }
        if (!crossed) ++ok;
    }
    rep.p_hat = static_cast<double>(ok) / static_cast<double>(trials);
    rep.se = std::sqrt(std::max(rep.p_hat * (1.0 - rep.p_hat), 1e-12) /
                       static_cast<double>(trials));
    rep.z = (rep.p_hat - rep.target) / rep.se;
    return rep;
}

double scale_function_J(const ContinuumParams& p, double x) {
    if (x <= 0.0) throw std::invalid_argument("x must be positive");
    if (!p.powerlaw()) {
        double s = 0.0;
        for (double cj : p.c) s += cj * cj * std::min(1.0, cj / x);
        return p.kappa * s;
    }
    // c_j >= x exactly for j <= (q/x)^rho
    double jx = std::floor(std::pow(p.power_q / x, p.power_rho));
    double head = std::pow(p.power_q, 2.0) * partial_pow_sum(2.0 / p.power_rho, jx);
    double tail3 = std::pow(p.power_q, 3.0) * tail_pow_sum(3.0 / p.power_rho, std::max(jx, 0.0));
    return p.kappa * (head + tail3 / x);
}

FractalExponents fractal_exponents(const ContinuumParams& p) {
    FractalExponents out;
    if (p.beta != 0.0) {
        out.gamma_ = out.eta_ = 2.0;
        out.dim_h = out.dim_p = 2.0;
        out.converged = true;
        return out;
    }
    double top = p.powerlaw() ? p.power_q : (p.c.empty() ? 1.0 : p.c.front());
    const int npts = 41;
    std::vector<double> lx(npts), ly(npts);
    for (int k = 0; k < npts; ++k) {
        // geometric grid from top*1e-3 down to top*1e-8: close to the top
        // size the additive constant in the head sum still bends the slope
        double e = 3.0 + 5.0 * static_cast<double>(k) / static_cast<double>(npts - 1);
        double x = top * std::pow(10.0, -e);
        lx[static_cast<std::size_t>(k)] = std::log(x);
        ly[static_cast<std::size_t>(k)] = std::log(std::max(scale_function_J(p, x), 1e-300));
    }
    const std::size_t win = 10;
    double smin = kInf, smax = -kInf;
    for (std::size_t lo = 0; lo + win < npts; lo += 5) {
        double s = window_slope(lx, ly, lo, lo + win);
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    out.slope_min = smin;
    out.slope_max = smax;
    out.gamma_ = 1.0 - smax;
    out.eta_ = 1.0 - smin;
    out.converged = (smax - smin) <= 0.05;
    out.dim_h = (out.gamma_ > 1.0 + 1e-9) ? out.gamma_ / (out.gamma_ - 1.0) : kInf;
    out.dim_p = (out.eta_ > 1.0 + 1e-9) ? out.eta_ / (out.eta_ - 1.0) : kInf;
    return out;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ContinuumConfig parse_continuum_config(std::istream& in) {
    ContinuumConfig cfg;
    std::string rule = "explicit";
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.empty())
            throw std::invalid_argument("config key '" + key + "' has no value");
        try {
            if (key == "alpha") cfg.params.alpha = std::stod(val);
            else if (key == "beta") cfg.params.beta = std::stod(val);
            else if (key == "kappa") cfg.params.kappa = std::stod(val);
            else if (key == "power_q") cfg.params.power_q = std::stod(val);
            else if (key == "power_rho") cfg.params.power_rho = std::stod(val);
            else if (key == "jmax") cfg.params.jmax = std::stoi(val);
            else if (key == "dt") cfg.params.dt = std::stod(val);
            else if (key == "horizon") cfg.params.horizon = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "c_rule") rule = val;
            else if (key == "c_list") {
                cfg.params.c.clear();
                std::istringstream cs(val);
                std::string tok;
                while (std::getline(cs, tok, ','))
                    cfg.params.c.push_back(std::stod(trim(tok)));
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        } catch (const std::logic_error& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    if (rule == "explicit") {
        cfg.params.power_rho = 0.0;
    } else if (rule != "powerlaw") {
        throw std::invalid_argument("c_rule must be explicit or powerlaw");
    }
    validate(cfg.params);
    return cfg;
}

ContinuumConfig parse_continuum_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_continuum_config(in);
}

} // namespace mulgraph::continuum
