#pragma once

#include <vector>

#include "mulgraph/path.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/rng.hpp"
#include "mulgraph/weights.hpp"

namespace mulgraph::oracle {

// Reference implementations kept deliberately naive: quadratic scans and
// exponential-state dynamic programs, no shared code with the fast paths
// they are used to cross-check.

// each pair {i,j} present independently with prob 1 - exp(-w_i w_j / sigma1);
// direct samples carry no exploration structure, so every edge is recorded
// as Surplus
queue::Graph direct_sample(const Weights& w, Rng& rng);

// hop distances from source; -1 marks unreachable vertices
std::vector<int> bfs_distances(const queue::Graph& g, int source);

// number of start times s <= t whose forward infimum strictly exceeds the
// value just before s; quadratic in the jump count
int brute_height(const PiecewisePath& path, double t);

// infimum of the path over [s, t]
double forward_infimum(const PiecewisePath& path, double s, double t);

// Shortest pinched distance between x and y over a base metric d given as a
// full matrix, where pinch i lets a route cross between endpoints a_i and
// b_i at cost eps. Each pinch is used at most once along a route (using one
// twice never shortens a path when eps >= 0); states are (subset of pinches
// used, current endpoint), so this is exact for a dozen pinches at most.
double brute_pinched_distance(const std::vector<std::vector<double>>& d,
                              const std::vector<std::pair<int, int>>& pinches,
                              double eps, int x, int y);

} // namespace mulgraph::oracle
