// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_SPECTRUM_HPP
#define QSPECKLE_SPECTRUM_HPP

#include <stdexcept>
#include <vector>

namespace qspeckle {

// Distinct positive eigenvalues gamma_m of the reduced single-photon density
// matrix, with multiplicities mu_m, in decreasing order.  They obey the sum
// rule sum_m mu_m gamma_m = 1.
struct SchmidtCluster {
    double value;
    int multiplicity;
};

struct SchmidtSpectrum {
    std::vector<SchmidtCluster> clusters;
    // Set when some eigenvalue gap fell between tol and 10*tol, i.e. the
    // grouping is sensitive to the chosen tolerance.
    bool ambiguous_clustering = false;

    double sum_rule() const
    {
        double s = 0.0;
        for (const auto& c : clusters) s += c.value * c.multiplicity;
        return s;
    }
};

inline void validate_spectrum(const SchmidtSpectrum& spectrum,
                              double sum_rule_tol = 1e-10)
{
    if (spectrum.clusters.empty())
        throw std::invalid_argument("spectrum must have at least one eigenvalue");
    double prev = 0.0;
    bool first = true;
    for (const auto& c : spectrum.clusters) {
        if (!(c.value > 0.0))
            throw std::invalid_argument("spectrum eigenvalues must be positive");
        if (c.multiplicity < 1)
            throw std::invalid_argument("spectrum multiplicities must be >= 1");
        if (!first && !(c.value < prev))
            throw std::invalid_argument("spectrum eigenvalues must be strictly decreasing");
        prev = c.value;
        first = false;
    }
    const double defect = spectrum.sum_rule() - 1.0;
    if (defect > sum_rule_tol || defect < -sum_rule_tol)
        throw std::invalid_argument("spectrum violates the sum rule sum mu*gamma = 1");
}

}  // namespace qspeckle

#endif  // QSPECKLE_SPECTRUM_HPP
