#include "mulgraph/weights.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mulgraph/numeric.hpp"

namespace mulgraph {

std::string to_string(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "subcritical";
        case Criticality::Critical: return "critical";
        case Criticality::Supercritical: return "supercritical";
    }
    return "?";
}

Weights::Weights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.size() < 2)
        throw std::invalid_argument("Weights: need at least two entries");
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!(w_[i] > 0.0))
            throw std::invalid_argument("Weights: entries must be positive");
        if (i > 0 && w_[i] > w_[i - 1])
            throw std::invalid_argument("Weights: entries must be non-increasing");
    }
    std::vector<double> p(w_.size());
    for (std::size_t i = 0; i < w_.size(); ++i) p[i] = w_[i];
    sigma1_ = numeric::pairwise_sum(p);
    for (std::size_t i = 0; i < w_.size(); ++i) p[i] = w_[i] * w_[i];
    sigma2_ = numeric::pairwise_sum(p);
    for (std::size_t i = 0; i < w_.size(); ++i) p[i] = w_[i] * w_[i] * w_[i];
    sigma3_ = numeric::pairwise_sum(p);
}

double sigma_r(const Weights& w, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("sigma_r: r must be positive");
    std::vector<double> p(w.values().size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(w.values()[i], r);
    return numeric::pairwise_sum(p);
}

Criticality classify(const Weights& w) {
    if (w.sigma2() > w.sigma1()) return Criticality::Supercritical;
    if (w.sigma2() < w.sigma1()) return Criticality::Subcritical;
    return Criticality::Critical;
}

Weights parse_weights(const std::string& text) {
    std::vector<double> vals;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        std::istringstream t(token);
        double v;
        while (t >> v) vals.push_back(v);
    }
    if (vals.empty()) throw std::invalid_argument("parse_weights: no values in '" + text + "'");
    return Weights(std::move(vals));
}

} // namespace mulgraph
