// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qspeckle/densities.hpp"
#include "qspeckle/engine.hpp"
#include "qspeckle/rng.hpp"

using namespace qspeckle;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("trial stream matches the published Philox 4x32-10 vector")
{
    // counter = 0, key = 0 known-answer block
    TrialStream stream(0, 0);
    const auto a = stream.next_u64();
    const auto b = stream.next_u64();
    CHECK(static_cast<std::uint32_t>(a) == 0x6627e8d5u);
    CHECK(static_cast<std::uint32_t>(a >> 32) == 0xe169c58du);
    CHECK(static_cast<std::uint32_t>(b) == 0xbc57ac4cu);
    CHECK(static_cast<std::uint32_t>(b >> 32) == 0x9b00dbd8u);
}

TEST_CASE("trial streams are reproducible and independent")
{
    TrialStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool identical = true, differs_trial = false, differs_seed = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        identical = identical && va == b.next_u64();
        differs_trial = differs_trial || va != c.next_u64();
        differs_seed = differs_seed || va != d.next_u64();
    }
    CHECK(identical);
    CHECK(differs_trial);
    CHECK(differs_seed);
}

TEST_CASE("sampled rows are bit-identical for a fixed (seed, trial)")
{
    const auto model = ScatteringModel::from_sigma2(16, 0.3);
    const auto [v1, w1] = sample_rows(model, 5, 99);
    const auto [v2, w2] = sample_rows(model, 5, 99);
    CHECK(v1 == v2);
    CHECK(w1 == w2);
    const auto [v3, w3] = sample_rows(model, 6, 99);
    CHECK(v1 != v3);
}

TEST_CASE("row entries have the second moment of the scattering model")
{
    const double sigma2 = 0.7;
    const auto model = ScatteringModel::from_sigma2(8, sigma2);
    const std::size_t trials = 125'000;  // 10^6 entries across the row
    double sum_abs2 = 0.0;
    std::complex<double> sum(0.0, 0.0);
    std::size_t n = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto [v, w] = sample_rows(model, t, 2026);
        for (int q = 0; q < model.dim; ++q) {
            sum_abs2 += std::norm(v[q]);
            sum += v[q];
            ++n;
        }
    }
    const double mean_abs2 = sum_abs2 / n;
    // Var |v|^2 = sigma^4, so 3 standard errors = 3 sigma^2 / sqrt(n)
    CHECK_THAT(mean_abs2, WithinAbs(sigma2, 3.0 * sigma2 / std::sqrt(n)));
    const double se_component = std::sqrt(0.5 * sigma2 / n);
    CHECK_THAT(sum.real() / n, WithinAbs(0.0, 3.0 * se_component));
    CHECK_THAT(sum.imag() / n, WithinAbs(0.0, 3.0 * se_component));
}

TEST_CASE("transport parametrization fixes sigma2 = 2l/(L dim)")
{
    const auto model = ScatteringModel::from_transport(100, 5.0, 250.0);
    CHECK_THAT(model.sigma2, WithinRel(2.0 * 5.0 / (250.0 * 100.0), 1e-14));
    CHECK_THROWS_AS(ScatteringModel::from_transport(10, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ScatteringModel::from_sigma2(0, 1.0), std::invalid_argument);
}

TEST_CASE("single-photon intensity")
{
    const auto state = make_pure_entangled(1, 2);
    const auto rho1 = reduced_density(state);

    SECTION("basis vector picks out the diagonal")
    {
        ComplexVector e0 = ComplexVector::Zero(2);
        e0[0] = 1.0;
        CHECK_THAT(intensity_single(e0, rho1, 2.0), WithinRel(1.0, 1e-14));
    }

    SECTION("identity/N density gives alpha1 |v|^2 / N")
    {
        ComplexMatrix eye = ComplexMatrix::Identity(4, 4);
        const ReducedDensity uniform(0.25 * eye);
        ComplexVector v(4);
        v << std::complex<double>(0.5, 1.0), std::complex<double>(0.0, -2.0),
            std::complex<double>(1.5, 0.0), std::complex<double>(-0.5, 0.5);
        CHECK_THAT(intensity_single(v, uniform, 1.3),
                   WithinRel(1.3 * v.squaredNorm() / 4.0, 1e-14));
    }

    SECTION("dense and diagonal paths agree")
    {
        std::mt19937_64 gen(15);
        const auto mixed = oracles::random_ensemble(gen, 4, 2);
        const auto rho_dense = reduced_density(mixed);
        REQUIRE_FALSE(rho_dense.is_diagonal());
        const auto [v, w] = sample_rows(ScatteringModel::from_sigma2(4, 1.0), 0, 3);
        const std::complex<double> form =
            v.transpose() * (rho_dense.entries() * v.conjugate());
        CHECK_THAT(intensity_single(v, rho_dense, 1.0), WithinRel(form.real(), 1e-12));
    }

    SECTION("dimension mismatch throws")
    {
        ComplexVector v = ComplexVector::Zero(3);
        CHECK_THROWS_AS(intensity_single(v, rho1, 1.0), std::invalid_argument);
    }

    SECTION("Monte Carlo mean is alpha1 sigma^2 within 0.5%")
    {
        const double sigma2 = 0.9, alpha1 = 1.7;
        const auto model = ScatteringModel::from_sigma2(2, sigma2);
        const std::size_t trials = 1'000'000;
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto [v, w] = sample_rows(model, t, 55);
            sum += intensity_single(v, rho1, alpha1);
        }
        CHECK_THAT(sum / trials, WithinRel(alpha1 * sigma2, 5e-3));
    }
}

TEST_CASE("biphoton intensity")
{
    SECTION("basis vectors pick out a single amplitude")
    {
        const auto state = make_pure_entangled(1, 2);
        ComplexVector e0 = ComplexVector::Zero(2), e1 = ComplexVector::Zero(2);
        e0[0] = 1.0;
        e1[1] = 1.0;
        CHECK_THAT(intensity_pair(e0, e1, state, 2.0), WithinRel(1.0, 1e-14));
    }

    SECTION("fast path equals the brute-force quartic sum")
    {
        std::mt19937_64 gen(117);
        std::normal_distribution<double> normal;
        for (int instance = 0; instance < 40; ++instance) {
            const int dim = 2 + instance % 7;  // up to 8
            const auto state = oracles::random_ensemble(gen, dim, 1 + instance % 3);
            const auto rho = oracles::dense_rho(state);
            ComplexVector v(dim), w(dim);
            for (int q = 0; q < dim; ++q) {
                v[q] = std::complex<double>(normal(gen), normal(gen));
                w[q] = std::complex<double>(normal(gen), normal(gen));
            }
            const double fast = intensity_pair(v, w, state, 1.3);
            const double brute = oracles::dense_intensity_pair(rho, v, w, 1.3);
            CHECK_THAT(fast, WithinAbs(brute, 1e-12 * std::max(1.0, std::abs(brute))));
        }
    }

    SECTION("Monte Carlo mean is alpha2 sigma^4 within 1%")
    {
        const double sigma2 = 1.1, alpha2 = 0.6;
        const auto state = make_pure_entangled(2, 4);
        const auto model = ScatteringModel::from_sigma2(4, sigma2);
        const std::size_t trials = 1'000'000;
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto [v, w] = sample_rows(model, t, 56);
            sum += intensity_pair(v, w, state, alpha2);
        }
        CHECK_THAT(sum / trials, WithinRel(alpha2 * sigma2 * sigma2, 1e-2));
    }

    SECTION("nonnegative on random inputs")
    {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> normal;
        const auto state = oracles::random_ensemble(gen, 5, 2);
        for (int i = 0; i < 100; ++i) {
            ComplexVector v(5), w(5);
            for (int q = 0; q < 5; ++q) {
                v[q] = std::complex<double>(normal(gen), normal(gen));
                w[q] = std::complex<double>(normal(gen), normal(gen));
            }
            CHECK(intensity_pair(v, w, state, 1.0) >= 0.0);
        }
    }
}

TEST_CASE("ensemble runs")
{
    const auto model = ScatteringModel::from_sigma2(10, 0.8);
    const DetectorPair detector(0, 1);
    const Efficiencies eff(1.0, 1.0);

    SECTION("single trial is reproducible")
    {
        const auto state = make_pure_entangled(5, 10);
        RunSettings settings;
        settings.trials = 1;
        settings.seed = 12345;
        const auto a = run_ensemble(model, detector, state, eff, settings);
        const auto b = run_ensemble(model, detector, state, eff, settings);
        CHECK(a.count() == 1);
        CHECK(a.moments(Channel::I1).m1 == b.moments(Channel::I1).m1);
        CHECK(a.moments(Channel::I2).m2 == b.moments(Channel::I2).m2);
    }

    SECTION("visibilities of rank-5 states at one million trials")
    {
        RunSettings settings;
        settings.trials = 1'000'000;
        settings.seed = 2468;

        const auto pure = run_ensemble(model, detector, make_pure_entangled(5, 10), eff,
                                       settings);
        const auto v1 = visibility(pure, Channel::I1);
        CHECK_THAT(v1.value, WithinAbs(0.1, 3.0 * v1.std_error));

        const auto mixed = run_ensemble(model, detector, make_fully_mixed(5, 10), eff,
                                        settings);
        const auto v2 = visibility(mixed, Channel::I2);
        CHECK_THAT(v2.value, WithinAbs(0.4, 3.0 * v2.std_error));
    }

    SECTION("variances follow the trace formulas")
    {
        const double alpha1 = 1.5, alpha2 = 0.75, sigma2 = 0.8;
        const Efficiencies scaled(alpha1, alpha2);
        const auto state = make_fully_mixed(3, 10);
        RunSettings settings;
        settings.trials = 1'000'000;
        settings.seed = 97531;
        const auto run = run_ensemble(model, detector, state, scaled, settings);

        const double tr_rho2 = purity(state);
        const double tr_rho1_2 = reduced_density(state).purity();
        const double s4 = sigma2 * sigma2;
        const double s8 = s4 * s4;

        const auto var1 = variance_estimate(run, Channel::I1);
        CHECK_THAT(var1.value,
                   WithinAbs(alpha1 * alpha1 * s4 * tr_rho1_2, 3.0 * var1.std_error));
        const auto var2 = variance_estimate(run, Channel::I2);
        CHECK_THAT(var2.value,
                   WithinAbs(alpha2 * alpha2 * s8 * (tr_rho2 + 2.0 * tr_rho1_2),
                             3.0 * var2.std_error));
    }

    SECTION("worker count does not change any statistic")
    {
        const auto state = make_fully_mixed(2, 10);
        RunSettings settings;
        settings.trials = 30'000;
        settings.seed = 777;
        settings.raw_cap = 30'000;
        settings.workers = 1;
        const auto serial = run_ensemble(model, detector, state, eff, settings);
        for (int workers : {3, 8}) {
            settings.workers = workers;
            const auto parallel = run_ensemble(model, detector, state, eff, settings);
            CHECK(parallel.moments(Channel::I1).m4 == serial.moments(Channel::I1).m4);
            CHECK(parallel.moments(Channel::I2).m3 == serial.moments(Channel::I2).m3);
            CHECK(parallel.raw(Channel::I2) == serial.raw(Channel::I2));
            CHECK(purity_estimate(parallel).std_error ==
                  purity_estimate(serial).std_error);
        }
    }

    SECTION("currents are nonnegative on every sample")
    {
        const auto state = make_fully_mixed(2, 10);
        RunSettings settings;
        settings.trials = 20'000;
        settings.seed = 31;
        settings.raw_cap = 20'000;
        const auto run = run_ensemble(model, detector, state, eff, settings);
        for (double x : run.raw(Channel::I1)) CHECK(x >= 0.0);
        for (double x : run.raw(Channel::I2)) CHECK(x >= 0.0);
    }

    SECTION("validation")
    {
        const auto state = make_pure_entangled(5, 10);
        RunSettings settings;
        settings.trials = 0;
        CHECK_THROWS_AS(run_ensemble(model, detector, state, eff, settings),
                        std::invalid_argument);
        settings.trials = 1;
        CHECK_THROWS_AS(run_ensemble(ScatteringModel::from_sigma2(12, 1.0), detector,
                                     state, eff, settings),
                        std::invalid_argument);
        CHECK_THROWS_AS(run_ensemble(model, DetectorPair(0, 10), state, eff, settings),
                        std::invalid_argument);
        CHECK_THROWS_AS(DetectorPair(3, 3), std::invalid_argument);
        CHECK_THROWS_AS(Efficiencies(0.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("single evaluated trial")
{
    const auto model = ScatteringModel::from_sigma2(4, 1.0);
    const auto state = make_pure_entangled(2, 4);
    const auto sample = sample_trial(model, state, Efficiencies(), 3, 5);
    CHECK(sample.v.size() == 4);
    CHECK(sample.vprime.size() == 4);
    CHECK(sample.i1 >= 0.0);
    CHECK(sample.i2 >= 0.0);
    const auto again = sample_trial(model, state, Efficiencies(), 3, 5);
    CHECK(sample.v == again.v);
    CHECK(sample.i2 == again.i2);
}

TEST_CASE("unitary row ensemble")
{
    const double sigma2 = 0.5;

    SECTION("rows are exactly orthonormal at the model scale")
    {
        const auto model = ScatteringModel::from_sigma2(64, sigma2);
        for (std::uint64_t t : {0ull, 1ull, 17ull}) {
            const auto [v, w] = sample_rows_unitary(model, t, 11);
            CHECK_THAT(v.squaredNorm(), WithinRel(64.0 * sigma2, 1e-12));
            CHECK_THAT(w.squaredNorm(), WithinRel(64.0 * sigma2, 1e-12));
            CHECK(std::abs(v.dot(w)) < 1e-12 * v.norm() * w.norm());
        }
    }

    SECTION("mean single-photon current matches the Gaussian model within 1%")
    {
        const int dim = 256;
        const auto state = make_pure_entangled(1, dim);
        const auto rho1 = reduced_density(state);
        const std::size_t trials = 50'000;
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            TrialStream stream(909, t);
            ComplexVector v, w;
            detail::fill_unitary_rows(stream, dim, sigma2, v, w);
            sum += intensity_single(v, rho1, 1.0);
        }
        CHECK_THAT(sum / trials, WithinRel(sigma2, 1e-2));
    }

    SECTION("needs at least two modes")
    {
        CHECK_THROWS_AS(sample_rows_unitary(ScatteringModel::from_sigma2(1, 1.0), 0, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("currents of a generic pure state follow the eigenvalue-spectrum laws")
{
    // random symmetric amplitude matrix: nondegenerate Schmidt spectrum,
    // non-diagonal reduced density matrix
    std::mt19937_64 gen(606060);
    std::normal_distribution<double> normal;
    ComplexMatrix raw(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            raw(r, c) = std::complex<double>(normal(gen), normal(gen));
    const auto state = make_general_pure(raw);
    const auto rho1 = reduced_density(state);
    REQUIRE_FALSE(rho1.is_diagonal());
    const auto spectrum = schmidt_spectrum(rho1);
    REQUIRE(spectrum.clusters.size() == 4);  // distinct eigenvalues

    const double sigma2 = 0.8;
    const auto model = ScatteringModel::from_sigma2(4, sigma2);
    RunSettings settings;
    settings.trials = 100'000;
    settings.seed = 181818;
    settings.raw_cap = settings.trials;
    const auto run = run_ensemble(model, DetectorPair(1, 3), state, Efficiencies(),
                                  settings);

    const double a1 = sigma2;
    const double a2 = sigma2 * sigma2;
    const auto cdf1 = ReferenceCdf::from_pdf(
        [&](double x) { return pdf_p1_general(spectrum, a1, x); }, 1e-9 * a1, 80.0 * a1);
    CHECK(ks_distance(run, Channel::I1, cdf1) < ks_critical(0.05, settings.trials));

    const auto cdf2 = ReferenceCdf::from_pdf(
        [&](double x) { return pdf_p2_general(spectrum, a2, x); }, 1e-9 * a2, 120.0 * a2);
    CHECK(ks_distance(run, Channel::I2, cdf2) < ks_critical(0.05, settings.trials));

    // moment relations close the loop at 3 standard errors
    const auto mean2 = mean_estimate(run, Channel::I2);
    CHECK_THAT(mean2.value, WithinAbs(a2, 3.0 * mean2.std_error));
    const auto var2 = variance_estimate(run, Channel::I2);
    CHECK_THAT(var2.value,
               WithinAbs(a2 * a2 * (1.0 + 2.0 * rho1.purity()), 3.0 * var2.std_error));
}

TEST_CASE("distributional shortcut: I2 ~ beta I1 E for pure states")
{
    // consequence of the P1 -> P2 integral relation
    const int m = 2;
    const double sigma2 = 1.0;
    const auto model = ScatteringModel::from_sigma2(2 * m, sigma2);
    const auto state = make_pure_entangled(m, 2 * m);
    const DetectorPair detector(0, 1);
    const Efficiencies eff;
    RunSettings settings;
    settings.trials = 30'000;
    settings.seed = 13579;
    settings.raw_cap = settings.trials;
    const auto direct = run_ensemble(model, detector, state, eff, settings);

    // shortcut samples from an independent seed
    const double beta = sigma2;  // alpha2 sigma^2 / alpha1
    const auto rho1 = reduced_density(state);
    SampleSet::Config config;
    config.planned_trials = settings.trials;
    config.raw_cap = settings.trials;
    SampleSet shortcut(config);
    for (std::uint64_t t = 0; t < settings.trials; ++t) {
        TrialStream stream(86420, t);
        ComplexVector v, w;
        detail::fill_gaussian_rows(stream, model.dim, sigma2, v, w);
        const double i1 = intensity_single(v, rho1, 1.0);
        const double unit_exp = -std::log1p(-stream.uniform());
        shortcut.add(t, i1, beta * i1 * unit_exp);
    }

    const double d = ks_two_sample(direct, Channel::I2, shortcut, Channel::I2);
    CHECK(d < ks_critical_two_sample(0.05, settings.trials, settings.trials));
}
