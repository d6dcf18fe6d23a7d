// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_ENGINE_HPP
#define QSPECKLE_ENGINE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "qspeckle/rng.hpp"
#include "qspeckle/states.hpp"
#include "qspeckle/stats.hpp"

// Monte Carlo sampling of the Gaussian random-scattering model.  Only the
// two detector rows of the scattering matrix are ever drawn (the currents
// depend on nothing else), so a trial costs O(dim) memory.

namespace qspeckle {

struct ScatteringModel {
    int dim;
    double sigma2;  // second moment <|S_kq|^2>

    static ScatteringModel from_sigma2(int dim, double sigma2)
    {
        if (dim < 1) throw std::invalid_argument("mode count must be >= 1");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
        return {dim, sigma2};
    }

    // Transmission through a slab: sigma^2 = 2 l / (L dim).
    static ScatteringModel from_transport(int dim, double mean_free_path, double length)
    {
        if (dim < 1) throw std::invalid_argument("mode count must be >= 1");
        if (!(mean_free_path > 0.0) || !(length > 0.0))
            throw std::invalid_argument("transport lengths must be positive");
        return {dim, 2.0 * mean_free_path / (length * dim)};
    }
};

struct DetectorPair {
    int k;
    int kprime;

    DetectorPair(int k_, int kprime_) : k(k_), kprime(kprime_)
    {
        if (k < 0 || kprime < 0) throw std::invalid_argument("detector indices must be >= 0");
        if (k == kprime)
            throw std::invalid_argument("coincidence detection needs two distinct outputs");
    }
};

struct Efficiencies {
    double alpha1 = 1.0;
    double alpha2 = 1.0;

    Efficiencies(double a1 = 1.0, double a2 = 1.0) : alpha1(a1), alpha2(a2)
    {
        if (!(alpha1 > 0.0) || !(alpha2 > 0.0))
            throw std::invalid_argument("detection efficiencies must be positive");
    }
};

struct SpeckleSample {
    ComplexVector v;       // detector row k of S
    ComplexVector vprime;  // detector row k'
    double i1 = 0.0;
    double i2 = 0.0;
};

enum class RowEnsemble { gaussian, unitary };

namespace detail {

inline void fill_gaussian_rows(TrialStream& stream, int dim, double sigma2,
                               ComplexVector& v, ComplexVector& vprime)
{
    v.resize(dim);
    vprime.resize(dim);
    for (int q = 0; q < dim; ++q) v[q] = stream.complex_normal(sigma2);
    for (int q = 0; q < dim; ++q) vprime[q] = stream.complex_normal(sigma2);
}

// Two rows of a Haar-random unitary, scaled to E|entry|^2 = sigma2.  Any two
// distinct rows of a Haar unitary form a uniformly random orthonormal
// 2-frame, which Gram-Schmidt on two Gaussian vectors produces exactly; the
// full matrix is never formed.
inline void fill_unitary_rows(TrialStream& stream, int dim, double sigma2,
                              ComplexVector& v, ComplexVector& vprime)
{
    if (dim < 2) throw std::invalid_argument("unitary rows need dim >= 2");
    v.resize(dim);
    vprime.resize(dim);
    for (int q = 0; q < dim; ++q) v[q] = stream.complex_normal(1.0);
    for (int q = 0; q < dim; ++q) vprime[q] = stream.complex_normal(1.0);
    v /= v.norm();
    vprime -= v * v.dot(vprime);
    vprime -= v * v.dot(vprime);  // second sweep tightens orthogonality
    vprime /= vprime.norm();
    const double scale = std::sqrt(dim * sigma2);
    v *= scale;
    vprime *= scale;
}

}  // namespace detail

// Rows k and k' of the Gaussian scattering model for one trial.  Fully
// determined by (seed, trial_id).
inline std::pair<ComplexVector, ComplexVector> sample_rows(const ScatteringModel& model,
                                                           std::uint64_t trial_id,
                                                           std::uint64_t seed)
{
    TrialStream stream(seed, trial_id);
    ComplexVector v, vprime;
    detail::fill_gaussian_rows(stream, model.dim, model.sigma2, v, vprime);
    return {std::move(v), std::move(vprime)};
}

inline std::pair<ComplexVector, ComplexVector> sample_rows_unitary(
    const ScatteringModel& model, std::uint64_t trial_id, std::uint64_t seed)
{
    TrialStream stream(seed, trial_id);
    ComplexVector v, vprime;
    detail::fill_unitary_rows(stream, model.dim, model.sigma2, v, vprime);
    return {std::move(v), std::move(vprime)};
}

// I1 = alpha1 * sum_{q,q'} v_q rho^(1)_{qq'} conj(v_q').
inline double intensity_single(const ComplexVector& v, const ReducedDensity& rho1,
                               double alpha1)
{
    if (v.size() != rho1.dim())
        throw std::invalid_argument("vector and density dimensions differ");
    if (rho1.is_diagonal()) {
        double sum = 0.0;
        for (int q = 0; q < v.size(); ++q) sum += rho1.diagonal()[q] * std::norm(v[q]);
        return alpha1 * sum;
    }
    const std::complex<double> form = v.transpose() * (rho1.entries() * v.conjugate());
    return alpha1 * form.real();
}

namespace detail {

inline double pair_form(const CoefficientMatrix& c, const ComplexVector& v,
                        const ComplexVector& vprime)
{
    std::complex<double> amp(0.0, 0.0);
    if (c.is_sparse()) {
        for (const auto& t : c.nonzeros()) amp += t.value * vprime[t.row] * v[t.col];
    } else {
        amp = vprime.transpose() * (c.entries() * v);
    }
    return std::norm(amp);
}

}  // namespace detail

// I2 = alpha2 * sum_j p_j |v'^T c_j v|^2, equal to the quartic sum over the
// dense density matrix for ensemble-form states.
inline double intensity_pair(const ComplexVector& v, const ComplexVector& vprime,
                             const StateEnsemble& state, double alpha2)
{
    if (v.size() != state.dim() || vprime.size() != state.dim())
        throw std::invalid_argument("vector and state dimensions differ");
    double sum = 0.0;
    for (const auto& comp : state.components())
        sum += comp.weight * detail::pair_form(comp.amplitude, v, vprime);
    return alpha2 * sum;
}

struct RunSettings {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    RowEnsemble ensemble = RowEnsemble::gaussian;
    int workers = 0;  // 0 = hardware concurrency
    int jackknife_blocks = 100;
    std::uint64_t raw_cap = 1'000'000;
    std::optional<HistogramSpec> hist_i1;
    std::optional<HistogramSpec> hist_i2;
};

// Run `trials` independent disorder realizations.  Trials are processed in
// fixed chunks whose partial statistics are reduced in trial order, so the
// result is identical for any worker count.
inline SampleSet run_ensemble(const ScatteringModel& model, const DetectorPair& detector,
                              const StateEnsemble& state, const Efficiencies& eff,
                              const RunSettings& settings)
{
    if (settings.trials < 1) throw std::invalid_argument("need at least one trial");
    if (state.dim() != model.dim)
        throw std::invalid_argument("state and model dimensions differ");
    if (detector.k >= model.dim || detector.kprime >= model.dim)
        throw std::invalid_argument("detector indices must be below the mode count");
    if (settings.ensemble == RowEnsemble::unitary && model.dim < 2)
        throw std::invalid_argument("unitary ensemble needs dim >= 2");

    const ReducedDensity rho1 = reduced_density(state);
    const SampleSet::Config config{settings.trials, settings.jackknife_blocks,
                                   settings.raw_cap, settings.hist_i1, settings.hist_i2};

    const std::uint64_t chunk_trials = SampleSet::kChunkTrials;
    const std::uint64_t chunk_count = (settings.trials + chunk_trials - 1) / chunk_trials;
    std::vector<std::optional<SampleSet>> partials(chunk_count);

    auto run_chunk = [&](std::uint64_t ci) {
        SampleSet partial(config);
        ComplexVector v, vprime;
        const std::uint64_t begin = ci * chunk_trials;
        const std::uint64_t end = std::min(settings.trials, begin + chunk_trials);
        for (std::uint64_t trial = begin; trial < end; ++trial) {
            TrialStream stream(settings.seed, trial);
            if (settings.ensemble == RowEnsemble::gaussian)
                detail::fill_gaussian_rows(stream, model.dim, model.sigma2, v, vprime);
            else
                detail::fill_unitary_rows(stream, model.dim, model.sigma2, v, vprime);
            const double i1 = intensity_single(v, rho1, eff.alpha1);
            const double i2 = intensity_pair(v, vprime, state, eff.alpha2);
            partial.add(trial, i1, i2);
        }
        partials[ci] = std::move(partial);
    };

    int workers = settings.workers > 0
                      ? settings.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, workers);
    if (workers == 1 || chunk_count == 1) {
        for (std::uint64_t ci = 0; ci < chunk_count; ++ci) run_chunk(ci);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::uint64_t ci = next.fetch_add(1); ci < chunk_count;
                     ci = next.fetch_add(1))
                    run_chunk(ci);
            });
        for (auto& t : pool) t.join();
    }

    SampleSet result = std::move(*partials[0]);
    for (std::uint64_t ci = 1; ci < chunk_count; ++ci) result.merge(std::move(*partials[ci]));
    return result;
}

inline SampleSet run_ensemble(const ScatteringModel& model, const DetectorPair& detector,
                              const StateEnsemble& state, const Efficiencies& eff,
                              std::uint64_t trials, std::uint64_t seed)
{
    RunSettings settings;
    settings.trials = trials;
    settings.seed = seed;
    return run_ensemble(model, detector, state, eff, settings);
}

// One fully evaluated trial (rows plus both currents).
inline SpeckleSample sample_trial(const ScatteringModel& model, const StateEnsemble& state,
                                  const Efficiencies& eff, std::uint64_t trial_id,
                                  std::uint64_t seed,
                                  RowEnsemble ensemble = RowEnsemble::gaussian)
{
    SpeckleSample sample;
    TrialStream stream(seed, trial_id);
    if (ensemble == RowEnsemble::gaussian)
        detail::fill_gaussian_rows(stream, model.dim, model.sigma2, sample.v, sample.vprime);
    else
        detail::fill_unitary_rows(stream, model.dim, model.sigma2, sample.v, sample.vprime);
    const ReducedDensity rho1 = reduced_density(state);
    sample.i1 = intensity_single(sample.v, rho1, eff.alpha1);
    sample.i2 = intensity_pair(sample.v, sample.vprime, state, eff.alpha2);
    return sample;
}

}  // namespace qspeckle

#endif  // QSPECKLE_ENGINE_HPP
