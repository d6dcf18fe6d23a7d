// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qspeckle/bessel.hpp"

using namespace qspeckle;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("K0 and K1 at unit argument match the integral oracle")
{
    // frozen from the quadrature of exp(-x cosh t) cosh(nt)
    CHECK_THAT(bessel_k_int(0, 1.0), WithinRel(0.42102443824070834, 1e-12));
    CHECK_THAT(bessel_k_int(1, 1.0), WithinRel(0.6019072301972346, 1e-12));
    CHECK_THAT(oracles::bessel_k_integral(0, 1.0), WithinRel(0.42102443824070834, 1e-11));
    CHECK_THAT(oracles::bessel_k_integral(1, 1.0), WithinRel(0.6019072301972346, 1e-11));
}

TEST_CASE("three-term recurrence closes exactly")
{
    for (double x : {0.5, 1.0, 5.0}) {
        const double residual =
            bessel_k_int(2, x) - bessel_k_int(0, x) - (2.0 / x) * bessel_k_int(1, x);
        CHECK_THAT(residual / bessel_k_int(2, x), WithinAbs(0.0, 1e-12));
    }
}

TEST_CASE("orders up to 21 match the integral representation to 1e-10")
{
    // 50-point grid over n <= 21, x in [1e-3, 100]
    const double xs[10] = {1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0, 100.0};
    const int ns[5] = {0, 1, 2, 9, 21};
    for (int n : ns)
        for (double x : xs) {
            const double oracle = oracles::bessel_k_integral(n, x);
            CHECK_THAT(bessel_k_int(n, x), WithinRel(oracle, 1e-10));
        }
}

TEST_CASE("branch seams are continuous")
{
    for (double x : {2.0, 8.0}) {
        CHECK_THAT(bessel_k_int(0, x * (1.0 - 1e-12)), WithinRel(bessel_k_int(0, x), 1e-10));
        CHECK_THAT(bessel_k_int(1, x * (1.0 - 1e-12)), WithinRel(bessel_k_int(1, x), 1e-10));
    }
}

TEST_CASE("log-space values stay finite at large order and tiny argument")
{
    const double log_k = log_bessel_k_int(99, 2e-5);
    CHECK(std::isfinite(log_k));
    // K_99(2e-5) ~ (98!/2) (1e5)^99 overflows a double; its log is moderate
    CHECK(log_k > 1000.0);
    CHECK(bessel_k_int(99, 2e-5) == std::numeric_limits<double>::infinity());

    // consistency where both representations exist
    for (int n : {2, 5, 13}) {
        for (double x : {1e-6, 1e-2, 1.0, 30.0, 300.0}) {
            CHECK_THAT(std::exp(log_bessel_k_int(n, x)), WithinRel(bessel_k_int(n, x), 1e-12));
        }
    }
}

TEST_CASE("extreme arguments stay accurate")
{
    CHECK_THAT(bessel_k_int(0, 1e-8), WithinRel(oracles::bessel_k_integral(0, 1e-8), 1e-10));
    CHECK_THAT(bessel_k_int(0, 700.0),
               WithinRel(std::exp(-700.0) * bessel_k0_scaled(700.0), 1e-12));
    // scaled large-x value against the asymptotic series leading term
    const double x = 700.0;
    const double leading = std::sqrt(std::numbers::pi / (2.0 * x)) *
                           (1.0 - 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
    CHECK_THAT(bessel_k0_scaled(x), WithinRel(leading, 1e-7));
}

TEST_CASE("domain errors")
{
    CHECK_THROWS_AS(bessel_k_int(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k_int(0, -1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k_int(-1, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_bessel_k_int(2, -0.5), std::domain_error);
}
