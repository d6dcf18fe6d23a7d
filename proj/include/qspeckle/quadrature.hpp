// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_QUADRATURE_HPP
#define QSPECKLE_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

// Adaptive Gauss-Kronrod (G7/K15) quadrature.  Nodes and weights are the
// QUADPACK dqk15 constants.

namespace qspeckle {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

namespace detail {

inline constexpr double kKronrodNodes[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0,
};

inline constexpr double kKronrodWeights[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992,
};

inline constexpr double kGaussWeights[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020,
};

template <class F>
void gauss_kronrod_panel(F&& f, double a, double b, double& value, double& error)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kronrod = 0.0, gauss = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double offset = half * kKronrodNodes[i];
        const double sum = f(center - offset) + f(center + offset);
        kronrod += kKronrodWeights[i] * sum;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
    }
    const double fc = f(center);
    kronrod += kKronrodWeights[7] * fc;
    gauss += kGaussWeights[3] * fc;
    value = kronrod * half;
    error = std::abs((kronrod - gauss) * half);
}

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

}  // namespace detail

// Integrate f over [a, b].  `initial_panels` guards against features much
// narrower than the interval; bump it when the integrand is a spike.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 0.0, int max_panels = 4000,
                     int initial_panels = 8)
{
    if (!(b > a)) return {};
    initial_panels = std::max(1, initial_panels);
    std::priority_queue<detail::Panel> queue;
    double total = 0.0, total_err = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + (b - a) * i / initial_panels;
        const double hi = a + (b - a) * (i + 1) / initial_panels;
        detail::Panel p{lo, hi, 0.0, 0.0};
        detail::gauss_kronrod_panel(f, p.a, p.b, p.value, p.error);
        total += p.value;
        total_err += p.error;
        queue.push(p);
    }
    int panels = initial_panels;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           panels < max_panels) {
        const detail::Panel worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        for (const auto& [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            detail::Panel p{lo, hi, 0.0, 0.0};
            detail::gauss_kronrod_panel(f, p.a, p.b, p.value, p.error);
            total += p.value;
            total_err += p.error;
            queue.push(p);
        }
        ++panels;
    }
    return {total, total_err, panels};
}

// Integrate f over [a, inf) through the map x = a + scale * t/(1-t).
template <class F>
QuadResult integrate_semi_infinite(F&& f, double a, double scale,
                                   double rel_tol = 1e-10, double abs_tol = 0.0,
                                   int max_panels = 4000, int initial_panels = 16)
{
    if (!(scale > 0.0)) throw std::invalid_argument("quadrature scale must be positive");
    auto mapped = [&](double t) {
        const double denom = 1.0 - t;
        const double x = a + scale * t / denom;
        return f(x) * scale / (denom * denom);
    };
    // Stop just short of t = 1; the omitted sliver is far beyond any
    // exponentially decaying tail handled here.
    return integrate(mapped, 0.0, 1.0 - 1e-9, rel_tol, abs_tol, max_panels,
                     initial_panels);
}

}  // namespace qspeckle

#endif  // QSPECKLE_QUADRATURE_HPP
