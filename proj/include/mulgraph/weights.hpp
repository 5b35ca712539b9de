#pragma once

#include <string>
#include <vector>

namespace mulgraph {

enum class Criticality { Subcritical, Critical, Supercritical };

std::string to_string(Criticality c);

// Finite non-increasing positive weight sequence with its first three power
// sums cached at construction. Immutable afterwards, safe to share across
// threads.
class Weights {
public:
    explicit Weights(std::vector<double> w);

    int n() const { return static_cast<int>(w_.size()); }
    double operator[](int j) const { return w_[j]; } // 0-based
    const std::vector<double>& values() const { return w_; }

    double sigma1() const { return sigma1_; }
    double sigma2() const { return sigma2_; }
    double sigma3() const { return sigma3_; }

private:
    std::vector<double> w_;
    double sigma1_, sigma2_, sigma3_;
};

// sum of w_j^r, pairwise-summed
double sigma_r(const Weights& w, double r);

// sign of sigma2 - sigma1 decides the regime
Criticality classify(const Weights& w);

// convenience: parse "3,2,1" (also accepts whitespace separators)
Weights parse_weights(const std::string& text);

} // namespace mulgraph
