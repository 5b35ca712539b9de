#include "mulgraph/io.hpp"

#include <ostream>

namespace mulgraph::io {

void write_edge_list(std::ostream& out, const queue::Graph& g) {
    for (const auto& [key, kind] : g.edges)
        out << key.first << ' ' << key.second << ' '
            << (kind == queue::EdgeKind::Tree ? 'T' : 'S') << '\n';
}

void write_tree(std::ostream& out, const queue::ExplorationTree& tree) {
    for (int j = 1; j <= tree.n(); ++j)
        out << j << ' ' << tree.parent[static_cast<std::size_t>(j)] << ' '
            << tree.height[static_cast<std::size_t>(j)] << '\n';
}

void write_pinches(std::ostream& out, const queue::PinchSet& pinches) {
    out.precision(17);
    for (std::size_t k = 0; k < pinches.pairs.size(); ++k)
        out << pinches.pairs[k].first << ' ' << pinches.pairs[k].second << ' '
            << pinches.atoms[k].second << '\n';
}

nlohmann::ordered_json component_json(const excursions::FiniteMetricSpace& space,
                                      const std::vector<std::pair<double, double>>& pairs,
                                      int dense_max) {
    nlohmann::ordered_json j;
    j["labels"] = space.labels;
    bool merged = false;
    for (const auto& cls : space.classes)
        if (cls.size() > 1) merged = true;
    if (merged) j["classes"] = space.classes;
    j["root"] = space.root;
    j["masses"] = space.mass;
    nlohmann::ordered_json jp = nlohmann::ordered_json::array();
    for (const auto& [s, t] : pairs) jp.push_back({s, t});
    j["pinch_pairs"] = std::move(jp);
    if (space.n() <= dense_max) j["distance_matrix"] = space.dist;
    return j;
}

nlohmann::ordered_json report_json(const stats::TestReport& rep) {
    nlohmann::ordered_json j;
    j["name"] = rep.name;
    j["statistic"] = rep.statistic;
    j["p_value"] = rep.p_value;
    j["trials"] = rep.trials;
    j["pass"] = rep.pass;
    j["seed"] = rep.seed;
    j["detail"] = rep.detail;
    return j;
}

} // namespace mulgraph::io
