#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mulgraph/excursions.hpp"
#include "mulgraph/oracle.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/weights.hpp"

using namespace mulgraph;

namespace {

Weights random_weights(Rng& rng, int max_n) {
    int n = 2 + static_cast<int>(rng.uniform() * (max_n - 1));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.uniform(0.2, 3.0);
    std::sort(v.begin(), v.end(), std::greater<>());
    return Weights(v);
}

double brute_tree_distance(const StepFunction& h, double s, double t) {
    if (s > t) std::swap(s, t);
    double m = h.value(s);
    for (std::size_t k = 0; k < h.times().size(); ++k) {
        double tk = h.times()[k];
        if (tk > s && tk <= t) m = std::min(m, h.values()[k]);
    }
    return h.value(s) + h.value(t) - 2.0 * m;
}

} // namespace

TEST_SUITE("excursions") {

TEST_CASE("intervals of a hand-built step function") {
    StepFunction h({0.0, 0.5, 2.0, 2.5, 3.0}, {0.0, 1.0, 0.0, 2.0, 0.0}, 4.0);
    auto excs = excursions::excursion_intervals(h);
    REQUIRE(excs.size() == 2);
    CHECK(excs[0].l == 0.5);
    CHECK(excs[0].r == 2.0);
    CHECK(excs[0].zeta() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(excs[1].l == 2.5);
    CHECK(excs[1].zeta() == doctest::Approx(0.5).epsilon(1e-15));
    // carried on its own clock
    CHECK(excs[0].h.value(0.0) == 1.0);
    CHECK(excs[0].h.horizon() == doctest::Approx(1.5).epsilon(1e-15));

    // equal lengths keep arrival order
    StepFunction g({0.0, 1.0, 2.0, 3.0, 4.0}, {0.0, 1.0, 0.0, 1.0, 0.0}, 5.0);
    auto tie = excursions::excursion_intervals(g);
    REQUIRE(tie.size() == 2);
    CHECK(tie[0].l == 1.0);
    CHECK(tie[1].l == 3.0);

    // an excursion still open at the horizon is closed there
    StepFunction open({0.0, 1.0}, {0.0, 1.0}, 2.0);
    auto oe = excursions::excursion_intervals(open);
    REQUIRE(oe.size() == 1);
    CHECK(oe[0].r == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("excursion lengths add up to the total service") {
    Rng rng(301);
    for (int trial = 0; trial < 50; ++trial) {
        Weights w = random_weights(rng, 8);
        queue::TrialOutput out = queue::sample_graph(w, rng);
        auto excs = excursions::excursion_intervals(queue::height_process(out.path));
        double total = 0.0;
        for (const auto& e : excs) total += e.zeta();
        CHECK(total == doctest::Approx(w.sigma1()).epsilon(1e-9));
    }
}

TEST_CASE("coded distance equals the brute scan") {
    Rng rng(302);
    for (int trial = 0; trial < 30; ++trial) {
        Weights w = random_weights(rng, 8);
        queue::TrialOutput out = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(out.path);
        excursions::TreeCoder coder(h);
        for (int rep = 0; rep < 40; ++rep) {
            double s = rng.uniform(0.0, h.horizon());
            double t = rng.uniform(0.0, h.horizon());
            CHECK(coder.distance(s, t) ==
                  doctest::Approx(brute_tree_distance(h, s, t)).epsilon(1e-12));
        }
        double s0 = rng.uniform(0.0, h.horizon());
        CHECK(excursions::tree_distance(h, s0, s0) == 0.0);
    }
}

TEST_CASE("coded metric satisfies the four-point condition") {
    Rng rng(303);
    Weights w({2.0, 1.5, 1.0, 1.0, 0.5});
    queue::TrialOutput out = queue::sample_graph(w, rng);
    StepFunction h = queue::height_process(out.path);
    excursions::TreeCoder coder(h);
    for (int rep = 0; rep < 10000; ++rep) {
        double x = rng.uniform(0.0, h.horizon());
        double y = rng.uniform(0.0, h.horizon());
        double z = rng.uniform(0.0, h.horizon());
        double v = rng.uniform(0.0, h.horizon());
        double a = coder.distance(x, y) + coder.distance(z, v);
        double b = coder.distance(x, z) + coder.distance(y, v);
        double c = coder.distance(x, v) + coder.distance(y, z);
        CHECK(a <= std::max(b, c) + 1e-9);
    }
}

TEST_CASE("pinches regroup by component and shift clocks") {
    Rng rng(304);
    Weights w({2.0, 1.5, 1.0, 1.0});
    for (int trial = 0; trial < 50; ++trial) {
        queue::TrialOutput out = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(out.path);
        auto excs = excursions::excursion_intervals(h);
        auto local = excursions::per_component_pinches(out.pinches, excs);
        REQUIRE(local.size() == excs.size());
        std::size_t total = 0;
        for (std::size_t k = 0; k < excs.size(); ++k) {
            for (auto [s, t] : local[k]) {
                CHECK(s >= 0.0);
                CHECK(t <= excs[k].zeta() + 1e-12);
                CHECK(s <= t);
            }
            total += local[k].size();
        }
        CHECK(total == out.pinches.pairs.size());
    }
}

TEST_CASE("pinched metric against the enumeration oracle") {
    Rng rng(305);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Weights w = random_weights(rng, 8);
        queue::TrialOutput out = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(out.path);
        auto excs = excursions::excursion_intervals(h);
        auto local = excursions::per_component_pinches(out.pinches, excs);
        for (double eps : {0.5, 1.0, 2.0}) {
            for (std::size_t k = 0; k < excs.size(); ++k) {
                if (local[k].size() > 10 || local[k].empty()) continue;
                excursions::FiniteMetricSpace sp =
                    excursions::pinched_metric_space(excs[k], local[k], eps);
                // base metric and pinch endpoints rebuilt independently
                excursions::TreeCoder coder(excs[k].h);
                int np = sp.n();
                std::vector<double> rep_times;
                // reconstruct representative times: up-steps of the excursion
                const auto& vs = excs[k].h.values();
                const auto& ts = excs[k].h.times();
                for (std::size_t i = 0; i < vs.size(); ++i) {
                    double prev = i == 0 ? 0.0 : vs[i - 1];
                    if (vs[i] > prev) rep_times.push_back(ts[i]);
                }
                REQUIRE(static_cast<int>(rep_times.size()) == np);
                std::vector<std::vector<double>> base(
                    static_cast<std::size_t>(np),
                    std::vector<double>(static_cast<std::size_t>(np), 0.0));
                for (int a = 0; a < np; ++a)
                    for (int b = 0; b < np; ++b)
                        base[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                            coder.distance(rep_times[static_cast<std::size_t>(a)],
                                           rep_times[static_cast<std::size_t>(b)]);
                std::vector<std::pair<int, int>> endpoint_idx;
                for (auto [s, t] : local[k]) {
                    // endpoints are the clients in service at s and at t;
                    // recover them by distance-zero matching against the reps
                    int ia = -1, ib = -1;
                    for (int i = 0; i < np; ++i) {
                        if (coder.distance(rep_times[static_cast<std::size_t>(i)], s) == 0.0)
                            ia = i;
                        if (coder.distance(rep_times[static_cast<std::size_t>(i)], t) == 0.0)
                            ib = i;
                    }
                    REQUIRE(ia >= 0);
                    REQUIRE(ib >= 0);
                    endpoint_idx.push_back({ia, ib});
                }
                for (int a = 0; a < np; ++a)
                    for (int b = 0; b < np; ++b) {
                        double want = oracle::brute_pinched_distance(base, endpoint_idx,
                                                                     eps, a, b);
                        CHECK(sp.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] ==
                              doctest::Approx(want).epsilon(1e-9));
                    }
                ++compared;
            }
        }
    }
    CHECK(compared > 20);
}

TEST_CASE("shortcuts only shrink distances, and monotonically in eps") {
    Rng rng(306);
    Weights w({2.0, 1.5, 1.0, 1.0});
    int seen = 0;
    for (int trial = 0; trial < 80; ++trial) {
        queue::TrialOutput out = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(out.path);
        auto excs = excursions::excursion_intervals(h);
        auto local = excursions::per_component_pinches(out.pinches, excs);
        for (std::size_t k = 0; k < excs.size(); ++k) {
            if (local[k].empty()) continue;
            auto s1 = excursions::pinched_metric_space(excs[k], local[k], 0.25);
            auto s2 = excursions::pinched_metric_space(excs[k], local[k], 1.0);
            auto s0 = excursions::pinched_metric_space(excs[k], {}, 1.0); // plain tree
            REQUIRE(s1.n() == s2.n());
            REQUIRE(s1.n() == s0.n());
            for (int a = 0; a < s1.n(); ++a)
                for (int b = 0; b < s1.n(); ++b) {
                    double d1 = s1.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                    double d2 = s2.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                    double d0 = s0.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                    CHECK(d1 <= d2 + 1e-12);
                    CHECK(d2 <= d0 + 1e-12);
                }
            ++seen;
        }
    }
    CHECK(seen > 10);
}

TEST_CASE("eps zero quotients the pinch pairs away") {
    Rng rng(307);
    Weights w({2.0, 1.5, 1.0, 1.0});
    int merged_seen = 0;
    for (int trial = 0; trial < 120 && merged_seen < 5; ++trial) {
        queue::TrialOutput out = queue::sample_graph(w, rng);
        StepFunction h = queue::height_process(out.path);
        auto excs = excursions::excursion_intervals(h);
        auto local = excursions::per_component_pinches(out.pinches, excs);
        for (std::size_t k = 0; k < excs.size(); ++k) {
            if (local[k].empty()) continue;
            // a pinch can land inside the serving client's own stripe; such a
            // pair glues a point to itself and cannot shrink the quotient
            excursions::TreeCoder coder(excs[k].h);
            bool joins_distinct = false;
            for (const auto& [s, t] : local[k])
                if (coder.distance(s, t) > 0.5) joins_distinct = true;
            if (!joins_distinct) continue;
            auto q = excursions::pinched_metric_space(excs[k], local[k], 0.0);
            auto full = excursions::pinched_metric_space(excs[k], local[k], 1e-14);
            CHECK(q.n() < full.n());
            CHECK(q.total_mass() == doctest::Approx(full.total_mass()).epsilon(1e-12));
            // no zero distances survive off the diagonal
            for (int a = 0; a < q.n(); ++a)
                for (int b = 0; b < q.n(); ++b)
                    if (a != b) CHECK(q.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] > 1e-12);
            // classes partition the original labels
            std::size_t names = 0;
            for (const auto& cls : q.classes) names += cls.size();
            CHECK(names == static_cast<std::size_t>(full.n()));
            ++merged_seen;
        }
    }
    CHECK(merged_seen >= 5);
}

TEST_CASE("component spaces carry the client masses") {
    Rng rng(308);
    for (int trial = 0; trial < 40; ++trial) {
        Weights w = random_weights(rng, 8);
        queue::TrialOutput out = queue::sample_graph(w, rng);
        auto spaces = excursions::component_spaces(out, w, 1.0);
        double mass = 0.0;
        std::vector<int> seen;
        for (const auto& sp : spaces) {
            mass += sp.total_mass();
            for (int lab : sp.labels) seen.push_back(lab);
        }
        CHECK(mass == doctest::Approx(w.sigma1()).epsilon(1e-9));
        std::sort(seen.begin(), seen.end());
        REQUIRE(static_cast<int>(seen.size()) == w.n());
        for (int j = 1; j <= w.n(); ++j) CHECK(seen[static_cast<std::size_t>(j - 1)] == j);
        // largest first
        for (std::size_t k = 1; k < spaces.size(); ++k)
            CHECK(spaces[k - 1].total_mass() >= spaces[k].total_mass() - 1e-12);
    }
}

} // TEST_SUITE
