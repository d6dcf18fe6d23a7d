// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

// Test-side oracles, deliberately independent of the library code paths they
// check:
//  - dense_* build the full dim^2 x dim^2 density matrix and evaluate traces
//    and the quartic current sum by brute force,
//  - bessel_k_integral evaluates K_n through its integral representation,
//  - samplers draw from reference laws with the standard library generator.

#ifndef QSPECKLE_TESTS_ORACLES_HPP
#define QSPECKLE_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qspeckle/quadrature.hpp"
#include "qspeckle/states.hpp"

namespace oracles {

using Complex = std::complex<double>;
using qspeckle::ComplexMatrix;
using qspeckle::ComplexVector;
using qspeckle::StateEnsemble;

// rho[(q1 q2), (q1' q2')] = sum_j p_j c_j[q1,q2] conj(c_j[q1',q2']).
inline ComplexMatrix dense_rho(const StateEnsemble& state)
{
    const int n = state.dim();
    ComplexMatrix rho = ComplexMatrix::Zero(n * n, n * n);
    for (const auto& comp : state.components()) {
        const auto& c = comp.amplitude.entries();
        for (int q1 = 0; q1 < n; ++q1)
            for (int q2 = 0; q2 < n; ++q2)
                for (int p1 = 0; p1 < n; ++p1)
                    for (int p2 = 0; p2 < n; ++p2)
                        rho(q1 * n + q2, p1 * n + p2) +=
                            comp.weight * c(q1, q2) * std::conj(c(p1, p2));
    }
    return rho;
}

inline double dense_purity(const ComplexMatrix& rho)
{
    return (rho * rho).trace().real();
}

inline ComplexMatrix dense_reduced(const ComplexMatrix& rho, int n)
{
    ComplexMatrix rho1 = ComplexMatrix::Zero(n, n);
    for (int q = 0; q < n; ++q)
        for (int p = 0; p < n; ++p)
            for (int q2 = 0; q2 < n; ++q2) rho1(q, p) += rho(q * n + q2, p * n + q2);
    return rho1;
}

// Quartic current sum evaluated verbatim over the dense density matrix.
inline double dense_intensity_pair(const ComplexMatrix& rho, const ComplexVector& v,
                                   const ComplexVector& vprime, double alpha2)
{
    const int n = static_cast<int>(v.size());
    Complex sum(0.0, 0.0);
    for (int q1 = 0; q1 < n; ++q1)
        for (int q2 = 0; q2 < n; ++q2)
            for (int p1 = 0; p1 < n; ++p1)
                for (int p2 = 0; p2 < n; ++p2)
                    sum += rho(q1 * n + q2, p1 * n + p2) * v[q1] * vprime[q2] *
                           std::conj(v[p1]) * std::conj(vprime[p2]);
    return alpha2 * sum.real();
}

// K_n(x) = integral_0^inf exp(-x cosh t) cosh(n t) dt.
inline double bessel_k_integral(int n, double x)
{
    // peak of the integrand in log scale
    const double t_peak = n > 0 ? std::asinh(static_cast<double>(n) / x) : 0.0;
    const double log_peak = n * t_peak - x * std::cosh(t_peak);
    double t_hi = std::max(1.0, t_peak);
    while (n * t_hi - x * std::cosh(t_hi) > log_peak - 50.0) t_hi *= 1.5;
    auto integrand = [&](double t) {
        // scaled by the peak value; cosh(nt) folded into the exponent so the
        // two huge factors never materialize separately
        if (n == 0) return std::exp(-x * std::cosh(t) - log_peak);
        return 0.5 * std::exp(n * t - x * std::cosh(t) - log_peak) *
               (1.0 + std::exp(-2.0 * n * t));
    };
    const auto result = qspeckle::integrate(integrand, 0.0, t_hi, 1e-13, 0.0, 8000, 64);
    return result.value * std::exp(log_peak);
}

// Random symmetric normalized amplitude matrix.
inline qspeckle::CoefficientMatrix random_amplitude(std::mt19937_64& gen, int dim)
{
    std::normal_distribution<double> normal;
    ComplexMatrix raw(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) raw(r, c) = Complex(normal(gen), normal(gen));
    ComplexMatrix sym = 0.5 * (raw + raw.transpose().eval());
    sym /= sym.norm();
    return qspeckle::CoefficientMatrix(std::move(sym));
}

inline StateEnsemble random_ensemble(std::mt19937_64& gen, int dim, int components)
{
    std::uniform_real_distribution<double> uniform(0.2, 1.0);
    std::vector<double> weights(components);
    double total = 0.0;
    for (double& w : weights) total += (w = uniform(gen));
    std::vector<StateEnsemble::Component> comps;
    for (int j = 0; j < components; ++j)
        comps.push_back({weights[j] / total, random_amplitude(gen, dim)});
    return StateEnsemble(dim, std::move(comps));
}

}  // namespace oracles

#endif  // QSPECKLE_TESTS_ORACLES_HPP
