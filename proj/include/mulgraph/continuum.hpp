#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"

namespace mulgraph::continuum {

// Parameters of the limit processes. The jump-size sequence c is either an
// explicit finite list or the power-law rule c_j = q * j^(-1/rho); rho must
// stay below 3 so the cubes remain summable.
struct ContinuumParams {
    double alpha = 0.0;
    double beta = 0.0;  // >= 0
    double kappa = 1.0; // > 0
    std::vector<double> c; // explicit sizes, non-increasing positive
    double power_q = 0.0;  // power-law scale; rule active when power_rho > 0
    double power_rho = 0.0;
    int jmax = 0;          // truncation index; 0 = pick automatically
    double horizon = 1.0;
    double dt = 1e-3;

    bool powerlaw() const { return power_rho > 0.0; }
    double c_at(long j) const; // 1-based
    int effective_jmax() const;
    bool infinite_variation() const; // beta > 0, or the full c has divergent squares
};

// throws std::invalid_argument when the cube sum diverges or fields are out
// of range
void validate(const ContinuumParams& p);

// sum of c_j^r over j > from_j under the active rule (analytic tail for the
// power law, zero for explicit lists)
double sigma_tail(const ContinuumParams& p, double r, long from_j);

// sum of c_j^r over j = 1..upto
double sigma_head(const ContinuumParams& p, double r, long upto);

// ===== Laplace exponent =====

// truncated at effective_jmax(); the dropped tail is reported by
// psi_tail_bound, never folded into the value
double psi_eval(const ContinuumParams& p, double lam);
double psi_tail_bound(const ContinuumParams& p, double lam); // <= kappa lam^2 sigma3(tail)/2

// inverse of the increasing branch: inf{u : psi(u) > lam}
double psi_inverse(const ContinuumParams& p, double lam);

// largest root of psi; 0 exactly when psi'(0+) = alpha >= 0
double largest_root(const ContinuumParams& p);

// ===== simulated paths =====

struct GridPath {
    double dt = 0.0;
    std::vector<double> values;      // values[i] = path at i*dt
    std::vector<double> jump_times;  // registered jumps, increasing
    std::vector<double> jump_sizes;
    // exact within-step infima (one per step) when the sampler drew them;
    // empty for paths assembled from blocks. Estimators that need the running
    // minimum use these when present and fall back to grid-monitoring
    // corrections otherwise.
    std::vector<double> step_min;

    double horizon() const { return dt * static_cast<double>(values.size() - 1); }
    long steps() const { return static_cast<long>(values.size()) - 1; }
    long index_of(double t) const; // nearest grid index not after t
};

struct YAPath {
    GridPath Y;
    GridPath A;
    std::vector<double> first_jump; // E_j per j <= jmax; +inf when past horizon
};

// joint simulation of the slow path and its repeat accumulator; jumps beyond
// the truncation are dropped together with their compensators (their net
// drift is zero; the L2 error is controlled by the cube tail)
YAPath simulate_Y(const ContinuumParams& p, Rng& rng);

// the fully compensated path (blue or red have the same law)
GridPath simulate_levy(const ContinuumParams& p, Rng& rng);

// ===== time change =====

struct BlueTimeChange {
    // per grid index of the slow clock: matching index on the mixed clock,
    // -1 once the required red depth is unreachable
    std::vector<long> theta_idx;
    double T_star = 0.0; // +inf when every depth within the horizon resolved
};

// first-passage scan of xr against the running levels of a; throws
// ExtendHorizon when xr ended before the deepest needed level and still
// looked capable of reaching it (it rose less than escape_margin above its
// minimum). Pass a finite margin for supercritical parameters.
BlueTimeChange theta_blue(const GridPath& a, const GridPath& xr,
                          double escape_margin);

struct AssembledX {
    GridPath X;                  // mixed path on its own grid
    std::vector<long> theta_idx; // copy of the time change used
    double T_star = 0.0;
    std::vector<char> is_blue;   // per mixed grid step
};

// block concatenation; each first-passage overshoot is pinned to its level
// so the slow path is reproduced exactly at its images
AssembledX assemble_mixed(const YAPath& ya, const GridPath& xr, double escape_margin);

// ===== height estimators =====

struct HeightEstimates {
    double occupation = 0.0;   // eps^{-1} * Leb{s <= t : X_s - inf_[s,t] <= eps}
    double lebesgue = 0.0;     // (2/beta) * Leb{ inf_[s,t] : s <= t }
    double record_count = 0.0; // #eps-clear record jumps / q(eps)
    bool lebesgue_valid = false;
    bool record_valid = false;
    double q_eps = 0.0;
};

double q_of_eps(const ContinuumParams& p, double eps); // sum kappa c_j (c_j - eps)_+

HeightEstimates height_estimators(const ContinuumParams& p, const GridPath& x,
                                  double t, double eps);

struct ContinuumHeight {
    std::vector<double> H; // per slow-clock grid index; NaN past T_star
    double T_star = 0.0;
};

// height of the mixed path read back through the time change
ContinuumHeight continuum_height_of_Y(const ContinuumParams& p, const YAPath& ya,
                                      const GridPath& xr, double eps,
                                      double escape_margin);

// ===== pinches =====

// same two-stage scheme as the discrete sampler: Poisson(kappa * area) atoms
// under the reflected path, each resolved to its earliest admissible start
// by range-minimum search over the grid
queue::PinchSet sample_continuum_pinches(const GridPath& y, double kappa, Rng& rng);

// trapezoid area between the path and its running minimum
double grid_reflected_area(const GridPath& y);

// ===== excursion statistics =====

struct LaplaceReport {
    double lambda = 0.0;
    double estimate = 0.0; // depth-normalized sum of 1 - exp(-lambda zeta)
    double target = 0.0;   // psi_inverse(lambda)
    double rel_err = 0.0;
    long excursions = 0;
    double depth = 0.0;
};

// streams Brownian-plus-jumps paths until each consumes unit infimum depth,
// collecting excursion lengths above the running minimum
LaplaceReport excursion_laplace_check(const ContinuumParams& p, double lam,
                                      int trials, Rng& rng, double depth_per_trial = 1.0);

// solves int_{v}^{infty} dlam / psi(lam) = a; requires beta > 0 (with a
// truncated jump list the integral diverges otherwise)
double v_of_a(const ContinuumParams& p, double a);

struct ExtinctionReport {
    double p_hat = 0.0;
    double target = 0.0; // exp(-x * v(a))
    double se = 0.0;
    double z = 0.0;
    int trials = 0;
};

// Monte Carlo for P(sup of the height stays <= a before the infimum reaches
// -x), with per-step Brownian bridge barrier correction
ExtinctionReport extinction_check(const ContinuumParams& p, double x, double a,
                                  int trials, Rng& rng);

// ===== fractal exponents =====

struct FractalExponents {
    double gamma_ = 0.0;
    double eta_ = 0.0;
    double dim_h = 0.0; // gamma/(gamma-1)
    double dim_p = 0.0; // eta/(eta-1)
    bool converged = false; // windowed slopes agreed
    double slope_min = 0.0, slope_max = 0.0;
};

// J(x) = sum kappa c_j^2 (1 and c_j/x minimum); exponents from the log-log
// slope of J over a geometric grid of x, exact head plus analytic tail
double scale_function_J(const ContinuumParams& p, double x);
FractalExponents fractal_exponents(const ContinuumParams& p);

// ===== config =====

struct ContinuumConfig {
    ContinuumParams params;
    std::uint64_t seed = 1;
};

// plain key=value lines: alpha, beta, kappa, c_rule (explicit|powerlaw),
// c_list, power_q, power_rho, jmax, dt, horizon, seed; '#' comments
ContinuumConfig parse_continuum_config(std::istream& in);
ContinuumConfig parse_continuum_config_text(const std::string& text);

} // namespace mulgraph::continuum
