// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_DENSITIES_HPP
#define QSPECKLE_DENSITIES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qspeckle/bessel.hpp"
#include "qspeckle/quadrature.hpp"
#include "qspeckle/spectrum.hpp"
#include "qspeckle/tabulated.hpp"

// Closed-form speckle distributions.
//
// For a maximally entangled pure state of Schmidt rank M the single-photon
// current follows a chi-square law with 4M degrees of freedom and the
// biphoton current follows the K-distribution with Bessel index 2M-1.  The
// general forms take an arbitrary eigenvalue spectrum {gamma_m, mu_m} of the
// reduced single-photon density matrix; their derivative terms are assembled
// from closed-form factor derivatives under the Leibniz rule, never from
// numerical differencing (multiplicities can reach 2M, where high-order
// finite differences are useless).  Everything that can overflow (factorials,
// Bessel tails, large powers) is evaluated in log space.

namespace qspeckle {

// Scale combinations of the detection model: a1 = alpha1*sigma^2 is the mean
// single-photon current, a2 = alpha2*sigma^4 the mean biphoton current, and
// beta = a2/a1 the kernel scale of the P1 -> P2 transform.
struct ScaleParams {
    double a1;
    double a2;

    ScaleParams(double a1_, double a2_) : a1(a1_), a2(a2_)
    {
        if (!(a1 > 0.0) || !(a2 > 0.0))
            throw std::invalid_argument("scale parameters must be positive");
    }

    static ScaleParams from_model(double alpha1, double alpha2, double sigma2)
    {
        return ScaleParams(alpha1 * sigma2, alpha2 * sigma2 * sigma2);
    }

    double beta() const { return a2 / a1; }
};

// Single-photon speckle density of the rank-M maximally entangled pure state:
// chi-square with 4M degrees of freedom, mean a1.
inline double pdf_p1_schmidt(int schmidt_rank, double a1, double i1)
{
    if (schmidt_rank < 1) throw std::invalid_argument("Schmidt rank must be >= 1");
    if (!(a1 > 0.0)) throw std::invalid_argument("a1 must be positive");
    if (i1 <= 0.0) return 0.0;
    const double m2 = 2.0 * schmidt_rank;
    const double log_pdf = m2 * std::log(m2 / a1) + (m2 - 1.0) * std::log(i1) -
                           m2 * i1 / a1 - std::lgamma(m2);
    return std::exp(log_pdf);
}

// Biphoton speckle density of the same state: the K-distribution, mean a2.
inline double pdf_p2_k(int schmidt_rank, double a2, double i2)
{
    if (schmidt_rank < 1) throw std::invalid_argument("Schmidt rank must be >= 1");
    if (!(a2 > 0.0)) throw std::invalid_argument("a2 must be positive");
    if (i2 < 0.0) return 0.0;
    const double m2 = 2.0 * schmidt_rank;
    if (i2 == 0.0) return m2 / ((m2 - 1.0) * a2);  // finite limit at the origin
    const double u = m2 * i2 / a2;
    const double log_pdf = std::log(2.0 * m2 / a2) - std::lgamma(m2) +
                           (schmidt_rank - 0.5) * std::log(u) +
                           log_bessel_k_int(static_cast<int>(m2) - 1, 2.0 * std::sqrt(u));
    return std::exp(log_pdf);
}

// Large-M limit of the biphoton speckle: exponential with mean a2.
inline double pdf_p2_exponential(double a2, double i2)
{
    if (!(a2 > 0.0)) throw std::invalid_argument("a2 must be positive");
    if (i2 < 0.0) return 0.0;
    return std::exp(-i2 / a2) / a2;
}

namespace detail {

// Taylor coefficients at x = 1 of the cross-cluster product
// G(x) = prod_{i != m} (1 - x g_i)^{-mu_i}, g_i = gamma_i/gamma_m, i.e.
// ghat_k = G^(k)(1)/k! for orders 0..n.  From G' = G h with the scaled
// log-derivative coefficients
//   hhat_j = h^(j)(1)/j! = sum_i mu_i g_i^(j+1) / (1-g_i)^(j+1)
// the coefficients follow by (k+1) ghat_{k+1} = sum_{j<=k} hhat_j ghat_{k-j};
// no explicit factorial ever appears.
inline std::vector<double> cross_product_taylor(
    std::span<const SchmidtCluster> clusters, std::size_t m, int n)
{
    const double gm = clusters[m].value;
    std::vector<double> geom;  // g_i/(1-g_i) per foreign cluster
    std::vector<double> mult;
    double g0 = 1.0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (i == m) continue;
        const double g = clusters[i].value / gm;
        if (std::abs(1.0 - g) < 1e-6)
            throw std::invalid_argument(
                "spectrum eigenvalues nearly coincide across clusters; "
                "coarsen degeneracy_tol so they share a cluster");
        const double base = 1.0 / (1.0 - g);
        geom.push_back(g * base);
        mult.push_back(clusters[i].multiplicity);
        double factor = 1.0;
        for (int p = 0; p < clusters[i].multiplicity; ++p) factor *= base;
        g0 *= factor;
    }
    std::vector<double> taylor(n + 1, 0.0);
    taylor[0] = g0;
    if (n == 0) return taylor;

    std::vector<double> hhat(n, 0.0);
    for (std::size_t idx = 0; idx < geom.size(); ++idx) {
        double term = mult[idx] * geom[idx];
        for (int j = 0; j < n; ++j) {
            hhat[j] += term;
            term *= geom[idx];
        }
    }
    for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int j = 0; j <= k; ++j) sum += hhat[j] * taylor[k - j];
        taylor[k + 1] = sum / (k + 1);
    }
    return taylor;
}

}  // namespace detail

namespace detail {

// The alternating term sums behind the general densities cancel; once the
// rounding noise of the largest terms rivals the density's natural height the
// result is meaningless and evaluation refuses, mirroring the near-degenerate
// eigenvalue guard.
inline void check_cancellation(double abs_total, double height_scale)
{
    if (abs_total * 5e-14 > 0.01 * height_scale)
        throw std::domain_error(
            "eigenvalue spectrum is too ill-conditioned for double-precision "
            "evaluation; merge close clusters or reduce multiplicities");
}

}  // namespace detail

// General single-photon speckle density for an arbitrary spectrum; reduces to
// pdf_p1_schmidt for the single 2M-fold eigenvalue 1/2M.
inline double pdf_p1_general(const SchmidtSpectrum& spectrum, double a1, double i1)
{
    validate_spectrum(spectrum);
    if (!(a1 > 0.0)) throw std::invalid_argument("a1 must be positive");
    if (i1 < 0.0) return 0.0;
    const auto& clusters = spectrum.clusters;
    double total = 0.0;
    double abs_total = 0.0;
    double height_scale = 0.0;
    for (std::size_t m = 0; m < clusters.size(); ++m) {
        const int n = clusters[m].multiplicity - 1;
        const double gamma = clusters[m].value;
        const double lambda = i1 / (a1 * gamma);
        const auto ghat = detail::cross_product_taylor(std::span(clusters), m, n);
        const double log_lambda = lambda > 0.0 ? std::log(lambda) : 0.0;
        double sum = 0.0;
        double abs_sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            if (ghat[n - k] == 0.0) continue;
            if (k > 0 && lambda == 0.0) break;
            const double log_mag = -std::lgamma(k + 1.0) + k * log_lambda - lambda;
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            const double term = std::exp(log_mag) * ghat[n - k];
            sum += sign * term;
            abs_sum += std::abs(term);
        }
        const double sign_n = (n % 2 == 0) ? 1.0 : -1.0;
        total += sign_n * sum / (a1 * gamma);
        abs_total += abs_sum / (a1 * gamma);
        height_scale = std::max(height_scale, 1.0 / (a1 * gamma));
    }
    detail::check_cancellation(abs_total, height_scale);
    return std::max(total, 0.0);
}

// General biphoton speckle density for a pure state with the given spectrum.
// The derivatives of K0(2 sqrt(x L)) follow the closed chain
// d^k/dx^k K0(2 sqrt(x L)) = (-1)^k (L/x)^(k/2) K_k(2 sqrt(x L)).
inline double pdf_p2_general(const SchmidtSpectrum& spectrum, double a2, double i2)
{
    validate_spectrum(spectrum);
    if (!(a2 > 0.0)) throw std::invalid_argument("a2 must be positive");
    if (i2 <= 0.0) return 0.0;
    const auto& clusters = spectrum.clusters;
    double total = 0.0;
    double abs_total = 0.0;
    double height_scale = 0.0;
    for (std::size_t m = 0; m < clusters.size(); ++m) {
        const int n = clusters[m].multiplicity - 1;
        const double gamma = clusters[m].value;
        const double big_lambda = i2 / (a2 * gamma);
        const double z = 2.0 * std::sqrt(big_lambda);
        const double log_lambda = std::log(big_lambda);
        const auto ghat = detail::cross_product_taylor(std::span(clusters), m, n);
        double sum = 0.0;
        double abs_sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            if (ghat[n - k] == 0.0) continue;
            const double log_mag = -std::lgamma(k + 1.0) + 0.5 * k * log_lambda +
                                   log_bessel_k_int(k, z);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            const double term = std::exp(log_mag) * ghat[n - k];
            sum += sign * term;
            abs_sum += std::abs(term);
        }
        const double sign_n = (n % 2 == 0) ? 1.0 : -1.0;
        total += sign_n * sum * 2.0 / (a2 * gamma);
        abs_total += abs_sum * 2.0 / (a2 * gamma);
        height_scale = std::max(height_scale, 2.0 / (a2 * gamma));
    }
    detail::check_cancellation(abs_total, height_scale);
    return std::max(total, 0.0);
}

// P2(I2) = (1/beta) integral dI1 P1(I1)/I1 exp(-I2/(beta I1)), valid for pure
// states only (caller's responsibility).  Integration runs in t = log(I1);
// the substitution absorbs the 1/I1 kernel and the I1 -> 0 region dies under
// the exponential cutoff.  [support_lo, support_hi] must bracket where p1
// carries mass; pass a tight bracket for narrowly peaked densities.
template <class F>
double transform_p1_to_p2_at(F&& p1, double support_lo, double support_hi,
                             double beta, double i2, double rel_tol = 1e-9)
{
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!(support_hi > 0.0) || !(support_hi > support_lo))
        throw std::invalid_argument("transform needs a positive support bracket");
    if (i2 < 0.0) return 0.0;
    const double t_hi = std::log(support_hi);
    double t_lo = support_lo > 0.0 ? std::log(support_lo) : t_hi - 120.0;
    if (i2 > 0.0) {
        // below this the exponential kernel is < e^-100
        const double cutoff = std::log(i2 / (100.0 * beta));
        t_lo = std::max(t_lo, std::min(cutoff, t_hi - 1.0));
    }
    const double scaled_i2 = i2 / beta;
    auto integrand = [&](double t) {
        const double i1 = std::exp(t);
        return p1(i1) * std::exp(-scaled_i2 / i1);
    };
    // Seed panel boundaries on a geometric cascade around the integrand peak
    // so spikes much narrower than the window cannot slip between nodes.
    double t_peak = t_lo;
    double best = -1.0;
    const int scan = 512;
    for (int i = 0; i <= scan; ++i) {
        const double t = t_lo + (t_hi - t_lo) * i / scan;
        const double v = integrand(t);
        if (v > best) {
            best = v;
            t_peak = t;
        }
    }
    std::vector<double> cuts{t_lo, t_hi};
    for (double w = 0.5 * (t_hi - t_lo); w > 1e-4; w *= 0.25) {
        if (t_peak - w > t_lo) cuts.push_back(t_peak - w);
        if (t_peak + w < t_hi) cuts.push_back(t_peak + w);
    }
    std::sort(cuts.begin(), cuts.end());
    double value = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        value += integrate(integrand, cuts[i], cuts[i + 1], rel_tol, 0.0, 600, 4).value;
    return value / beta;
}

template <class F>
TabulatedDensity transform_p1_to_p2(F&& p1, double support_lo, double support_hi,
                                    const ScaleParams& params,
                                    std::span<const double> i2_grid,
                                    double rel_tol = 1e-9)
{
    if (i2_grid.size() < 2)
        throw std::invalid_argument("transform needs an output grid of >= 2 points");
    std::vector<double> grid(i2_grid.begin(), i2_grid.end());
    std::vector<double> density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        density[i] =
            transform_p1_to_p2_at(p1, support_lo, support_hi, params.beta(), grid[i], rel_tol);
    return TabulatedDensity(std::move(grid), std::move(density));
}

inline TabulatedDensity transform_p1_to_p2(const TabulatedDensity& p1,
                                           const ScaleParams& params,
                                           std::span<const double> i2_grid,
                                           double rel_tol = 1e-9)
{
    if (p1.normalization_defect() > 1e-3)
        throw std::invalid_argument("transform input density is not normalized");
    return transform_p1_to_p2([&](double x) { return p1(x); }, p1.grid().front(),
                              p1.grid().back(), params, i2_grid, rel_tol);
}

// Cumulative distribution of an analytic pdf, built once by panel-wise
// quadrature on a log-spaced grid and interpolated monotonically.  Suitable
// as the reference of a Kolmogorov-Smirnov comparison.
class ReferenceCdf {
  public:
    template <class F>
    static ReferenceCdf from_pdf(F&& pdf, double lo, double hi, int points = 4096)
    {
        if (!(lo > 0.0) || !(hi > lo) || points < 2)
            throw std::invalid_argument("reference cdf needs 0 < lo < hi");
        ReferenceCdf ref;
        ref.grid_ = log_grid(lo, hi, points);
        ref.cdf_.resize(ref.grid_.size());
        ref.cdf_[0] = integrate(pdf, 0.0, lo, 1e-12, 1e-15).value;
        for (std::size_t i = 1; i < ref.grid_.size(); ++i) {
            double value, error;
            detail::gauss_kronrod_panel(pdf, ref.grid_[i - 1], ref.grid_[i], value, error);
            ref.cdf_[i] = ref.cdf_[i - 1] + value;
        }
        ref.derivs_ = detail::pchip_derivatives(ref.grid_, ref.cdf_);
        ref.tail_density_ = pdf(hi);
        return ref;
    }

    double operator()(double x) const
    {
        if (x <= 0.0) return 0.0;
        if (x < grid_.front()) return cdf_.front() * x / grid_.front();
        if (x >= grid_.back()) {
            const double remainder = std::max(1.0 - cdf_.back(), 0.0);
            if (tail_density_ <= 0.0 || remainder <= 0.0) return std::min(cdf_.back(), 1.0);
            const double tau = remainder / tail_density_;
            return std::min(1.0 - remainder * std::exp(-(x - grid_.back()) / tau), 1.0);
        }
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        const std::size_t i = it - grid_.begin() - 1;
        const double y =
            detail::hermite_eval(grid_[i], grid_[i + 1], cdf_[i], cdf_[i + 1], derivs_[i],
                                 derivs_[i + 1], x);
        return std::clamp(y, 0.0, 1.0);
    }

  private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
    std::vector<double> derivs_;
    double tail_density_ = 0.0;
};

}  // namespace qspeckle

#endif  // QSPECKLE_DENSITIES_HPP
