// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_TABULATED_HPP
#define QSPECKLE_TABULATED_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qspeckle {

namespace detail {

// Fritsch-Carlson monotone derivative choice for piecewise-cubic Hermite
// interpolation.  Guarantees no overshoot between data points.
inline std::vector<double> pchip_derivatives(const std::vector<double>& x,
                                             const std::vector<double>& y)
{
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n == 1) return d;
    std::vector<double> h(n - 1), slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        slope[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = slope[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i - 1] * slope[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / slope[i - 1] + w2 / slope[i]);
        }
    }
    auto endpoint = [](double h0, double h1, double s0, double s1) {
        double der = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (der * s0 <= 0.0)
            der = 0.0;
        else if (s0 * s1 < 0.0 && std::abs(der) > 3.0 * std::abs(s0))
            der = 3.0 * s0;
        return der;
    };
    d[0] = endpoint(h[0], h[1], slope[0], slope[1]);
    d[n - 1] = endpoint(h[n - 2], h[n - 3], slope[n - 2], slope[n - 3]);
    return d;
}

inline double hermite_eval(double x0, double x1, double y0, double y1, double d0,
                           double d1, double x)
{
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return y0 * (2.0 * t3 - 3.0 * t2 + 1.0) + h * d0 * (t3 - 2.0 * t2 + t) +
           y1 * (-2.0 * t3 + 3.0 * t2) + h * d1 * (t3 - t2);
}

}  // namespace detail

// A probability density tabulated on a strictly increasing grid of
// nonnegative abscissae.  Between nodes the density is interpolated by a
// monotone piecewise cubic in log-density; it is zero outside the grid and
// wherever a grid value is zero.  integral() adds analytic tail estimates
// (power law on the left, exponential on the right) to the trapezoid rule,
// so a density tabulated on the default grids integrates to 1 within 1e-6.
class TabulatedDensity {
  public:
    static constexpr int kDefaultPoints = 6144;

    TabulatedDensity(std::vector<double> grid, std::vector<double> density)
        : grid_(std::move(grid)), density_(std::move(density))
    {
        if (grid_.size() < 2 || grid_.size() != density_.size())
            throw std::invalid_argument("tabulated density needs matching grids of >= 2 points");
        if (grid_.front() < 0.0)
            throw std::invalid_argument("tabulated density grid must be nonnegative");
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
            if (!(grid_[i] < grid_[i + 1]))
                throw std::invalid_argument("tabulated density grid must be strictly increasing");
        for (double f : density_)
            if (!(f >= 0.0) || !std::isfinite(f))
                throw std::invalid_argument("tabulated density values must be finite and nonnegative");
        build_interpolant();
    }

    template <class F>
    static TabulatedDensity from_pdf(F&& pdf, double lo, double hi,
                                     int points = kDefaultPoints)
    {
        if (!(lo > 0.0) || !(hi > lo))
            throw std::invalid_argument("from_pdf needs 0 < lo < hi");
        if (points < 2) throw std::invalid_argument("from_pdf needs >= 2 points");
        std::vector<double> grid(points), density(points);
        const double step = std::log(hi / lo) / (points - 1);
        for (int i = 0; i < points; ++i) {
            grid[i] = lo * std::exp(step * i);
            density[i] = pdf(grid[i]);
        }
        grid.back() = hi;
        return TabulatedDensity(std::move(grid), std::move(density));
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return density_; }

    double operator()(double x) const
    {
        if (x < grid_.front() || x > grid_.back()) return 0.0;
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        std::size_t i = (it == grid_.begin()) ? 0 : (it - grid_.begin() - 1);
        if (i + 1 >= grid_.size()) i = grid_.size() - 2;
        const double f0 = density_[i];
        const double f1 = density_[i + 1];
        if (f0 <= 0.0 || f1 <= 0.0) {
            // linear blend into the zero region
            const double t = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
            return f0 + t * (f1 - f0);
        }
        const double y = detail::hermite_eval(grid_[i], grid_[i + 1], std::log(f0),
                                              std::log(f1), logderiv_[i],
                                              logderiv_[i + 1], x);
        return std::exp(y);
    }

    // Trapezoid on the grid plus tail corrections.
    double integral() const { return weighted_integral(0); }

    double mean() const
    {
        const double total = weighted_integral(0);
        return weighted_integral(1) / total;
    }

    double normalization_defect() const { return std::abs(integral() - 1.0); }

  private:
    void build_interpolant()
    {
        // PCHIP in log-density over each contiguous positive run.
        logderiv_.assign(grid_.size(), 0.0);
        std::size_t start = 0;
        while (start < grid_.size()) {
            if (density_[start] <= 0.0) {
                ++start;
                continue;
            }
            std::size_t stop = start;
            while (stop + 1 < grid_.size() && density_[stop + 1] > 0.0) ++stop;
            const std::size_t run = stop - start + 1;
            if (run >= 2) {
                std::vector<double> xs(grid_.begin() + start, grid_.begin() + stop + 1);
                std::vector<double> ys(run);
                for (std::size_t i = 0; i < run; ++i) ys[i] = std::log(density_[start + i]);
                const auto d = detail::pchip_derivatives(xs, ys);
                std::copy(d.begin(), d.end(), logderiv_.begin() + start);
            }
            start = stop + 1;
        }
    }

    // integral of x^power * density, trapezoid + tails
    double weighted_integral(int power) const
    {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
            const double w0 = std::pow(grid_[i], power) * density_[i];
            const double w1 = std::pow(grid_[i + 1], power) * density_[i + 1];
            total += 0.5 * (w0 + w1) * (grid_[i + 1] - grid_[i]);
        }
        // Left tail: power-law continuation f(x) = f(x0) (x/x0)^p below the grid.
        const double x0 = grid_.front();
        if (x0 > 0.0 && density_[0] > 0.0 && density_[1] > 0.0) {
            double p = std::log(density_[1] / density_[0]) / std::log(grid_[1] / x0);
            p = std::clamp(p, -0.5, 60.0);
            total += density_[0] * std::pow(x0, power + 1) / (p + power + 1.0);
        }
        // Right tail: exponential continuation from the last two points.
        const std::size_t n = grid_.size();
        if (density_[n - 1] > 0.0 && density_[n - 2] > density_[n - 1]) {
            const double tau = (grid_[n - 1] - grid_[n - 2]) /
                               std::log(density_[n - 2] / density_[n - 1]);
            const double xe = grid_[n - 1];
            if (power == 0)
                total += density_[n - 1] * tau;
            else  // power == 1
                total += density_[n - 1] * tau * (xe + tau);
        }
        return total;
    }

    std::vector<double> grid_;
    std::vector<double> density_;
    std::vector<double> logderiv_;
};

// Log-spaced grid helper for density tabulation and CSV export.
inline std::vector<double> log_grid(double lo, double hi, int points)
{
    if (!(lo > 0.0) || !(hi > lo) || points < 2)
        throw std::invalid_argument("log grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[i] = lo * std::exp(step * i);
    grid.back() = hi;
    return grid;
}

}  // namespace qspeckle

#endif  // QSPECKLE_TABULATED_HPP
