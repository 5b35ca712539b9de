#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mulgraph/weights.hpp"

namespace mulgraph::stats {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    long trials = 0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::string detail;
};

// Per-pair binomial z-test of queue-sampler edge frequencies against
// 1 - exp(-w_i w_j / sigma1). statistic = max |z| over pairs; the pass flag
// applies a Bonferroni correction across pairs at alpha_level. corrupt adds
// spurious edges with probability 0.05 (power checks only).
TestReport edge_frequency_test(const Weights& w, long trials, double alpha_level,
                               std::uint64_t seed, bool corrupt = false);

// Two-sample chi-square between queue and direct samplers over all labeled
// graphs; n must be 3 or 4. Sparse cells (combined count < 10) are merged
// into one bucket and noted.
TestReport graph_law_equivalence(const Weights& w, long trials, double alpha_level,
                                 std::uint64_t seed, bool corrupt = false);

// Queue-against-queue variant with independent streams; the null holds by
// construction, so repeated p-values calibrate the test itself.
TestReport graph_law_calibration(const Weights& w, long trials, double alpha_level,
                                 std::uint64_t seed);

// Chi-square of observed children counts against the queue's offspring law,
// censusing whole components so no subtree is ever truncated. Also checks
// the empirical mean against sigma2/sigma1 (3 SE); supercritical weights are
// refused. Tail cells below 1e-6 probability are merged.
TestReport offspring_test(const Weights& w, long nodes, double alpha_level,
                          std::uint64_t seed);

// Two-sample KS between largest-component masses of the two samplers.
TestReport mass_distribution_test(const Weights& w, long trials, double alpha_level,
                                  std::uint64_t seed);

// One joint trajectory rescaled as (X(b_n t)/a_n, (a_n/b_n) H(b_n t),
// Y(b_n t)/a_n, (a_n/b_n) cal_H(b_n t)); columns t, X, H, Y, cal_H on a
// fixed grid of rows. Export only, no assertion.
void rescale_export(const Weights& w, double a_n, double b_n, int rows,
                    std::uint64_t seed, std::ostream& out);

} // namespace mulgraph::stats
