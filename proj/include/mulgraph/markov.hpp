#pragma once

#include <limits>
#include <vector>

#include "mulgraph/path.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/weights.hpp"

namespace mulgraph::markov {

struct MarkedAtom {
    double time;
    int type; // 1..n
};

struct MarkedPointMeasure {
    std::vector<MarkedAtom> atoms; // strictly increasing times
    double horizon = 0.0;
};

// unit-rate arrivals, types drawn with probability w_j / sigma1
MarkedPointMeasure sample_marked_ppm(const Weights& w, double horizon, Rng& rng);

// drift -1, jump w_{type} at every atom
PiecewisePath markov_load(const MarkedPointMeasure& m, const Weights& w);

enum class Colour { Blue, Red };

struct Colouring {
    std::vector<Colour> colour; // per atom
    std::vector<char> repeat;   // type already appeared among earlier blue clients
    std::vector<int> first_blue; // per type (index type-1): atom index, -1 if none
};

// replayed recursively: a repeat of a blue type is red; anyone else takes the
// colour of the client in service on arrival, blue when the server is idle
Colouring colour_clients(const MarkedPointMeasure& m, const Weights& w);

// The two-queue time change. s holds the times the repeat-weight process A
// jumps; s_prime the matching first-passage times of the red path (+inf once
// the red path escapes for good, which fixes T_star).
struct TimeChange {
    std::vector<double> s;
    std::vector<double> s_prime;
    double T_star = std::numeric_limits<double>::infinity();

    double sprime_before(int l) const { return l <= 0 ? 0.0 : s_prime[l - 1]; }
    int blocks() const { return static_cast<int>(s.size()); }

    double theta_b(double t) const;      // t + gamma^r(A_t); +inf past T_star
    double theta_b_left(double t) const;
    double lambda_b(double u) const;     // 1-Lipschitz inverse, flat on red stretches
    double lambda_r(double u) const { return u - lambda_b(u); }
};

enum class JumpOrigin { Blue, RepeatBlue, Red };

struct Embedding {
    MarkedPointMeasure blue;  // as sampled, horizon = blue-time extent
    MarkedPointMeasure red;   // as far as first passages required
    std::vector<double> first_arrival; // per type; +inf if absent within the extent
    PiecewisePath Y;          // no-repeat load on [0, extent]
    StepFunction A;           // accumulated repeat weight on [0, extent]
    TimeChange tc;
    PiecewisePath X;          // mixed load; horizon stops at theta_b(T_star-) if finite
    std::vector<int> x_types;          // aligned with X.jumps()
    std::vector<JumpOrigin> x_origin;  // aligned with X.jumps()
};

// Samples the blue measure until min_blue_types distinct types arrived (all
// n when -1) and the no-repeat queue has drained, but never stopping before
// min_extent of blue time; resolves the red first-passage time of every
// repeat level, and concatenates the two paths block by block. Exact float
// ties inside the assembled path surface as CollisionError; callers redraw
// the trial.
//
// mixed_cap truncates the construction at that point on the mixed clock: a
// red stretch still open there is left unresolved and the assembled path's
// horizon lands on the cap. Sampling is sequential in the mixed clock, so
// the law of the path below the cap is unchanged. Critical stretches have
// heavy-tailed durations (infinite mean), so callers that only read the
// mixed path on a fixed window must cap, or a single stretch can exhaust
// memory.
Embedding build_embedding(const Weights& w, Rng& rng, int min_blue_types = -1,
                          double min_extent = 0.0,
                          double mixed_cap = std::numeric_limits<double>::infinity());

// stack depth of the Markov load path (same replay as queue::height_process)
StepFunction markov_height(const PiecewisePath& x);

// entries k = 0..kmax, plus one trailing entry holding the tail mass
std::vector<double> offspring_pmf(const Weights& w, int kmax);

struct NodeCensus {
    int children;
    Colour colour;
};

// child counts of every client whose service completed within the horizon;
// rejects supercritical weights (the exploration need not terminate)
std::vector<NodeCensus> gw_children_census(const MarkedPointMeasure& m, const Weights& w,
                                           const Colouring& col);

// largest root of the load path's Laplace exponent; 0 unless supercritical.
// Drives the exact finiteness draw for red first passages.
double rho_w(const Weights& w);

// the mixed path's jumps as a typed measure, for colouring cross-checks
MarkedPointMeasure mixed_measure(const Embedding& e);

struct EmbeddingCheck {
    int events_checked = 0;
    int value_violations = 0;    // |Y_t - X(theta_b(t))| > tol at an atom time
    int height_violations = 0;   // stack depths disagree at an atom time
    int block_violations = 0;    // red block fails to return to its opening level
    double max_value_err = 0.0;
};

// pathwise identities at every blue atom time strictly before T_star
EmbeddingCheck check_embedding(const Embedding& e, double tol = 1e-9);

} // namespace mulgraph::markov
