#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mulgraph/common.hpp"
#include "mulgraph/numeric.hpp"
#include "mulgraph/path.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/weights.hpp"

using namespace mulgraph;

TEST_SUITE("core") {

TEST_CASE("weights power sums and regimes") {
    Weights w({3.0, 2.0, 1.0});
    CHECK(w.sigma1() == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(w.sigma2() == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(w.sigma3() == doctest::Approx(36.0).epsilon(1e-15));
    CHECK(classify(w) == Criticality::Supercritical);
    CHECK(classify(Weights({1.0, 1.0})) == Criticality::Critical);
    CHECK(classify(Weights({0.5, 0.5})) == Criticality::Subcritical);
    CHECK(sigma_r(w, 2.0) == doctest::Approx(14.0).epsilon(1e-15));

    CHECK_THROWS_AS(Weights({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Weights({1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(Weights({1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Weights({1.0, -1.0}), std::invalid_argument);

    Weights p = parse_weights("3, 2,1");
    CHECK(p.n() == 3);
    CHECK(p[2] == 1.0);
    CHECK_THROWS_AS(parse_weights(""), std::invalid_argument);
}

TEST_CASE("piecewise path evaluation and infimum") {
    PiecewisePath p(-1.0, {{1.0, 5.0}}, 6.0);
    CHECK(p.value(0.5) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(p.value_left(1.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(p.value(1.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(p.value(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.infimum(3.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(p.infimum(0.5) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(path_infimum(p, 3.0) == doctest::Approx(-1.0).epsilon(1e-15));

    PiecewisePath q(-1.0, {{0.5, 0.2}}, 2.0);
    CHECK(q.infimum(1.0) == doctest::Approx(-0.8).epsilon(1e-15));

    CHECK_THROWS_AS(PiecewisePath(-1.0, {{1.0, 1.0}, {1.0, 2.0}}, 3.0), CollisionError);
}

TEST_CASE("step function evaluation") {
    StepFunction f({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}, 3.0);
    CHECK(f.value(0.5) == 0.0);
    CHECK(f.value(1.0) == 2.0);
    CHECK(f.value_left(1.0) == 0.0);
    CHECK(f.value(2.5) == 1.0);
    CHECK(f.segment(0.5) == 0);
    CHECK(f.segment(1.0) == 1);
    CHECK(f.min_on(0.5, 1.5) == 0.0);
    CHECK(f.min_on(1.0, 1.5) == 2.0);
    CHECK(f.min_on(1.5, 2.5) == 1.0);
}

TEST_CASE("error hierarchy") {
    CHECK_THROWS_AS(throw CollisionError("x"), std::runtime_error);
    CHECK_THROWS_AS(throw RetryTrial("x"), std::runtime_error);
    CHECK_THROWS_AS(throw ExtendHorizon("x"), std::runtime_error);
}

TEST_CASE("pairwise sum keeps precision") {
    std::vector<double> xs(1000000, 0.1);
    CHECK(numeric::pairwise_sum(xs) == doctest::Approx(100000.0).epsilon(1e-12));
}

TEST_CASE("chi-square and normal tails") {
    CHECK(numeric::chi2_sf(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
    // 95th percentile of chi2(5) is 11.0705
    CHECK(numeric::chi2_sf(11.0705, 5.0) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(numeric::chi2_sf(3.841459, 1.0) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(numeric::normal_two_sided_p(1.959964) == doctest::Approx(0.05).epsilon(1e-4));
    CHECK(numeric::normal_two_sided_p(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ks helpers behave on known inputs") {
    // same empirical law: p should be 1
    std::vector<double> a{0.1, 0.2, 0.3, 0.4}, b{0.1, 0.2, 0.3, 0.4};
    CHECK(numeric::ks_two_sample_p(a, b) == doctest::Approx(1.0).epsilon(1e-9));

    // clearly separated samples
    std::vector<double> lo(200), hi(200);
    for (int i = 0; i < 200; ++i) {
        lo[i] = i / 200.0;
        hi[i] = 1.0 + i / 200.0;
    }
    CHECK(numeric::ks_two_sample_p(lo, hi) < 1e-6);

    // uniform grid is as uniform as it gets
    std::vector<double> u(500);
    for (int i = 0; i < 500; ++i) u[i] = (i + 0.5) / 500.0;
    CHECK(numeric::ks_uniform_p(u) > 0.5);
}

TEST_CASE("adaptive simpson") {
    double third = numeric::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(third == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
    double two = numeric::adaptive_simpson([](double x) { return std::sin(x); }, 0.0,
                                           std::numbers::pi, 1e-12);
    CHECK(two == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("sparse range minimum matches brute scan") {
    Rng rng(404);
    std::vector<double> xs(257);
    for (auto& x : xs) x = rng.uniform(-5.0, 5.0);
    numeric::SparseMin rmq(xs);
    for (int rep = 0; rep < 500; ++rep) {
        std::size_t lo = static_cast<std::size_t>(rng.uniform() * 257.0);
        std::size_t hi = static_cast<std::size_t>(rng.uniform() * 257.0);
        if (lo > hi) std::swap(lo, hi);
        double brute = xs[lo];
        for (std::size_t i = lo; i <= hi; ++i) brute = std::min(brute, xs[i]);
        CHECK(rmq.query(lo, hi) == brute);
    }
}

TEST_CASE("union find merges transitively") {
    numeric::UnionFind uf(6);
    uf.unite(0, 1);
    uf.unite(1, 2);
    uf.unite(4, 5);
    CHECK(uf.find(0) == uf.find(2));
    CHECK(uf.find(4) == uf.find(5));
    CHECK(uf.find(3) != uf.find(0));
    CHECK(uf.find(3) != uf.find(4));
}

TEST_CASE("per-trial seeds are stable and distinct") {
    CHECK(trial_seed(7, 3) == trial_seed(7, 3));
    CHECK(trial_seed(7, 3) != trial_seed(7, 4));
    CHECK(trial_seed(7, 3) != trial_seed(8, 3));

    Rng a(trial_seed(7, 3)), b(trial_seed(7, 3));
    for (int i = 0; i < 16; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("rng marginals look right") {
    Rng rng(2024);
    const int n = 100000;
    double se_mean = 0.0, ee_mean = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        se_mean += u;
        ee_mean += rng.exponential(2.0);
    }
    se_mean /= n;
    ee_mean /= n;
    CHECK(std::abs(se_mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(ee_mean - 0.5) < 4.0 * 0.5 / std::sqrt(double(n)));

    // poisson through both branches of the sampler
    for (double mean : {3.0, 80.0}) {
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < 20000; ++i) {
            double k = static_cast<double>(rng.poisson(mean));
            acc += k;
            acc2 += k * k;
        }
        double m = acc / 20000.0;
        double v = acc2 / 20000.0 - m * m;
        CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / 20000.0));
        CHECK(v == doctest::Approx(mean).epsilon(0.1));
    }

    // discrete frequencies proportional to the weights
    std::vector<double> wv{3.0, 2.0, 1.0};
    std::vector<long> counts(3, 0);
    for (int i = 0; i < 60000; ++i) ++counts[static_cast<std::size_t>(rng.discrete(wv, 6.0))];
    for (int j = 0; j < 3; ++j) {
        double p = wv[static_cast<std::size_t>(j)] / 6.0;
        double z = (counts[static_cast<std::size_t>(j)] - 60000.0 * p) /
                   std::sqrt(60000.0 * p * (1.0 - p));
        CHECK(std::abs(z) < 4.5);
    }
}

} // TEST_SUITE
