#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mulgraph::numeric {

// ===== summation =====

// pairwise (cascade) summation; error grows like log(n) rather than n
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

// ===== range minimum =====

// static sparse table; query is min over an inclusive index range
class SparseMin {
public:
    SparseMin() = default;

    explicit SparseMin(std::vector<double> values) { build(std::move(values)); }

    void build(std::vector<double> values) {
        std::size_t n = values.size();
        table_.clear();
        table_.push_back(std::move(values));
        for (std::size_t len = 2; len <= n; len *= 2) {
            const auto& prev = table_.back();
            std::vector<double> row(n - len + 1);
            for (std::size_t i = 0; i + len <= n; ++i)
                row[i] = std::min(prev[i], prev[i + len / 2]);
            table_.push_back(std::move(row));
        }
    }

    double query(std::size_t lo, std::size_t hi) const { // inclusive
        if (lo > hi) throw std::invalid_argument("SparseMin: empty range");
        std::size_t len = hi - lo + 1;
        std::size_t k = std::bit_width(len) - 1;
        return std::min(table_[k][lo], table_[k][hi + 1 - (std::size_t(1) << k)]);
    }

    std::size_t size() const { return table_.empty() ? 0 : table_[0].size(); }

private:
    std::vector<std::vector<double>> table_;
};

// ===== quadrature =====

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}
} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_depth = 48) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// ===== special functions for test statistics =====

namespace detail {
inline double gamma_p_series(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}
} // namespace detail

// regularized upper incomplete gamma Q(a, x)
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_cf(a, x);
}

// survival function of a chi-square with df degrees of freedom
inline double chi2_sf(double stat, double df) {
    if (stat <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * stat);
}

// two-sided tail of a standard normal
inline double normal_two_sided_p(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

// Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
inline double kolmogorov_sf(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// two-sample Kolmogorov-Smirnov p-value (asymptotic, with the usual
// small-sample effective size correction)
inline double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    double en = std::sqrt(na * nb / (na + nb));
    return kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
}

// one-sample KS against Uniform(0,1)
inline double ks_uniform_p(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double lo = i / n, hi = (i + 1) / n;
        d = std::max({d, std::fabs(x[i] - lo), std::fabs(x[i] - hi)});
    }
    double en = std::sqrt(n);
    return kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
}

// ===== union-find (for quotienting zero-distance classes) =====

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t v) {
        while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
        return v;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

} // namespace mulgraph::numeric
