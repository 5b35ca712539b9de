#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mulgraph/excursions.hpp"
#include "mulgraph/queue.hpp"
#include "mulgraph/stats.hpp"

namespace mulgraph::io {

// one "i j T|S" line per edge, tree edges marked T, surplus S
void write_edge_list(std::ostream& out, const queue::Graph& g);

// one "j parent height" line per client
void write_tree(std::ostream& out, const queue::ExplorationTree& tree);

// one "s_p t_p y_p" line per resolved pinch
void write_pinches(std::ostream& out, const queue::PinchSet& pinches);

// {labels, classes?, root, masses, pinch_pairs, distance_matrix?}; the
// matrix is included only up to dense_max points
nlohmann::ordered_json component_json(const excursions::FiniteMetricSpace& space,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      int dense_max);

nlohmann::ordered_json report_json(const stats::TestReport& rep);

} // namespace mulgraph::io
