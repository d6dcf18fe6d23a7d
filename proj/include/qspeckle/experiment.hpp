// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_EXPERIMENT_HPP
#define QSPECKLE_EXPERIMENT_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qspeckle/densities.hpp"
#include "qspeckle/engine.hpp"
#include "qspeckle/state_io.hpp"
#include "qspeckle/stats.hpp"

// Experiment orchestration: a JSON experiment description drives simulation,
// analytic curve export, and simulation-vs-analytics comparisons.  All
// outputs are byte-deterministic functions of (config, seed).

namespace qspeckle {

struct HistogramConfig {
    int bins = 64;
    std::string mode = "linear";  // or "log"
    double min = 0.0;             // min == max == 0 selects an automatic range
    double max = 0.0;
};

struct ExperimentConfig {
    nlohmann::json state = {{"pure_entangled", {{"M", 1}}}};
    int dim = 2;
    double sigma2 = 1.0;
    std::optional<std::pair<double, double>> transport;  // (l, L)
    int k = 0;
    int kprime = 1;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    std::string ensemble = "gaussian";
    int workers = 1;
    HistogramConfig histogram;
    std::string out_dir = ".";
    std::string prefix = "run";
    bool samples_csv = false;

    static ExperimentConfig from_json(const nlohmann::json& j)
    {
        ExperimentConfig config;
        if (j.contains("state")) config.state = j.at("state");
        if (j.contains("model")) {
            const auto& model = j.at("model");
            config.dim = model.at("dim").get<int>();
            if (model.contains("l") || model.contains("L")) {
                config.transport = {model.at("l").get<double>(), model.at("L").get<double>()};
                const double derived = 2.0 * config.transport->first /
                                       (config.transport->second * config.dim);
                if (model.contains("sigma2") &&
                    std::abs(model.at("sigma2").get<double>() - derived) > 1e-14)
                    throw std::invalid_argument(
                        "model sigma2 conflicts with the (l, L) transport values");
                config.sigma2 = derived;
            } else {
                config.sigma2 = model.at("sigma2").get<double>();
            }
        }
        if (j.contains("detector")) {
            config.k = j.at("detector").at("k").get<int>();
            config.kprime = j.at("detector").at("kprime").get<int>();
        }
        if (j.contains("efficiencies")) {
            config.alpha1 = j.at("efficiencies").at("alpha1").get<double>();
            config.alpha2 = j.at("efficiencies").at("alpha2").get<double>();
        }
        config.trials = j.value("trials", config.trials);
        config.seed = j.value("seed", config.seed);
        config.ensemble = j.value("ensemble", config.ensemble);
        config.workers = j.value("workers", config.workers);
        if (j.contains("histogram")) {
            const auto& h = j.at("histogram");
            config.histogram.bins = h.value("bins", config.histogram.bins);
            config.histogram.mode = h.value("mode", config.histogram.mode);
            config.histogram.min = h.value("min", config.histogram.min);
            config.histogram.max = h.value("max", config.histogram.max);
        }
        if (j.contains("output")) {
            const auto& out = j.at("output");
            config.out_dir = out.value("dir", config.out_dir);
            config.prefix = out.value("prefix", config.prefix);
            config.samples_csv = out.value("samples_csv", config.samples_csv);
        }
        return config;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["state"] = state;
        j["model"]["dim"] = dim;
        if (transport) {
            j["model"]["l"] = transport->first;
            j["model"]["L"] = transport->second;
        } else {
            j["model"]["sigma2"] = sigma2;
        }
        j["detector"] = {{"k", k}, {"kprime", kprime}};
        j["efficiencies"] = {{"alpha1", alpha1}, {"alpha2", alpha2}};
        j["trials"] = trials;
        j["seed"] = seed;
        j["ensemble"] = ensemble;
        j["workers"] = workers;
        j["histogram"] = {{"bins", histogram.bins},
                          {"mode", histogram.mode},
                          {"min", histogram.min},
                          {"max", histogram.max}};
        j["output"] = {{"dir", out_dir}, {"prefix", prefix}, {"samples_csv", samples_csv}};
        return j;
    }

    static ExperimentConfig load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    ScatteringModel model() const { return ScatteringModel::from_sigma2(dim, sigma2); }
    DetectorPair detector() const
    {
        DetectorPair pair(k, kprime);
        if (k >= dim || kprime >= dim)
            throw std::invalid_argument("detector indices must be below the mode count");
        return pair;
    }
    Efficiencies efficiencies() const { return Efficiencies(alpha1, alpha2); }
    StateEnsemble build_state() const { return state_from_json(state, dim); }
    ScaleParams scales() const { return ScaleParams::from_model(alpha1, alpha2, sigma2); }

    RowEnsemble row_ensemble() const
    {
        if (ensemble == "gaussian") return RowEnsemble::gaussian;
        if (ensemble == "unitary") return RowEnsemble::unitary;
        throw std::invalid_argument("ensemble must be \"gaussian\" or \"unitary\"");
    }

    HistogramSpec histogram_spec(Channel channel) const
    {
        const bool log_bins = histogram.mode == "log";
        if (histogram.mode != "linear" && histogram.mode != "log")
            throw std::invalid_argument("histogram mode must be \"linear\" or \"log\"");
        HistogramSpec spec;
        spec.bins = histogram.bins;
        spec.log_bins = log_bins;
        if (histogram.min == 0.0 && histogram.max == 0.0) {
            const double scale = channel == Channel::I1 ? scales().a1 : scales().a2;
            spec.lo = log_bins ? 1e-4 * scale : 0.0;
            spec.hi = 12.0 * scale;
        } else {
            spec.lo = histogram.min;
            spec.hi = histogram.max;
        }
        return spec;
    }

    RunSettings run_settings() const
    {
        RunSettings settings;
        settings.trials = trials;
        settings.seed = seed;
        settings.ensemble = row_ensemble();
        settings.workers = workers;
        settings.hist_i1 = histogram_spec(Channel::I1);
        settings.hist_i2 = histogram_spec(Channel::I2);
        return settings;
    }
};

namespace detail {

// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string format_double(double value)
{
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

inline void write_file(const std::filesystem::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string histogram_csv(const Histogram& hist)
{
    std::string csv = "bin_left,bin_right,count,density\n";
    for (int i = 0; i < hist.spec().bins; ++i) {
        csv += format_double(hist.edge(i));
        csv += ',';
        csv += format_double(hist.edge(i + 1));
        csv += ',';
        csv += std::to_string(hist.counts()[i]);
        csv += ',';
        csv += format_double(hist.density(i));
        csv += '\n';
    }
    return csv;
}

inline std::string samples_csv(const SampleSet& samples)
{
    const auto trials = samples.raw_trials();
    const auto i1 = samples.raw(Channel::I1);
    const auto i2 = samples.raw(Channel::I2);
    std::string csv = "trial_id,I1,I2\n";
    for (std::size_t i = 0; i < trials.size(); ++i) {
        csv += std::to_string(trials[i]);
        csv += ',';
        csv += format_double(i1[i]);
        csv += ',';
        csv += format_double(i2[i]);
        csv += '\n';
    }
    return csv;
}

inline std::string curve_csv(std::span<const double> x, std::span<const double> pdf)
{
    std::string csv = "x,pdf\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        csv += format_double(x[i]);
        csv += ',';
        csv += format_double(pdf[i]);
        csv += '\n';
    }
    return csv;
}

}  // namespace detail

inline nlohmann::json summary_json(const ExperimentConfig& config, const SampleSet& samples)
{
    const Estimate mean1 = mean_estimate(samples, Channel::I1);
    const Estimate mean2 = mean_estimate(samples, Channel::I2);
    const Estimate var1 = variance_estimate(samples, Channel::I1);
    const Estimate var2 = variance_estimate(samples, Channel::I2);
    const Estimate v1 = visibility(samples, Channel::I1);
    const Estimate v2 = visibility(samples, Channel::I2);
    const Estimate purity = purity_estimate(samples);
    nlohmann::json j;
    j["n"] = samples.count();
    j["mean_I1"] = mean1.value;
    j["mean_I1_stderr"] = mean1.std_error;
    j["mean_I2"] = mean2.value;
    j["mean_I2_stderr"] = mean2.std_error;
    j["var_I1"] = var1.value;
    j["var_I1_stderr"] = var1.std_error;
    j["var_I2"] = var2.value;
    j["var_I2_stderr"] = var2.std_error;
    j["V1"] = v1.value;
    j["V1_stderr"] = v1.std_error;
    j["V2"] = v2.value;
    j["V2_stderr"] = v2.std_error;
    j["purity"] = purity.value;
    j["purity_stderr"] = purity.std_error;
    j["skewness_I2"] = skewness_estimate(samples, Channel::I2).value;
    j["seed"] = config.seed;
    j["trials"] = config.trials;
    j["ensemble"] = config.ensemble;
    j["effective_raw_n"] = samples.raw(Channel::I2).size();
    j["ks"] = nlohmann::json::object();
    return j;
}

struct SimulateResult {
    SampleSet samples;
    nlohmann::json summary;
    std::vector<std::string> files;
};

inline SimulateResult cmd_simulate(const ExperimentConfig& config)
{
    SampleSet samples = run_ensemble(config.model(), config.detector(),
                                     config.build_state(), config.efficiencies(),
                                     config.run_settings());
    nlohmann::json summary = summary_json(config, samples);

    const std::filesystem::path dir(config.out_dir);
    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& contents) {
        const auto path = dir / (config.prefix + name);
        detail::write_file(path, contents);
        files.push_back(path.string());
    };
    emit("_hist_i1.csv", detail::histogram_csv(*samples.hist(Channel::I1)));
    emit("_hist_i2.csv", detail::histogram_csv(*samples.hist(Channel::I2)));
    if (config.samples_csv) emit("_samples.csv", detail::samples_csv(samples));
    emit("_summary.json", summary.dump(2) + "\n");
    return {std::move(samples), std::move(summary), std::move(files)};
}

// Analytic curve export.
struct AnalyticRequest {
    std::string kind;  // p1_schmidt | p2_k | p2_exp | p1_general | p2_general
    int schmidt_rank = 1;
    double a1 = 1.0;
    double a2 = 1.0;
    SchmidtSpectrum spectrum;
    double grid_min = 0.0;  // 0 selects default 1e-4 * scale
    double grid_max = 0.0;  // 0 selects default 50 * scale
    int grid_points = 512;
    std::string out_path = "curve.csv";
};

inline std::vector<double> analytic_curve(const AnalyticRequest& request,
                                          std::span<const double> grid)
{
    std::vector<double> pdf(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        if (request.kind == "p1_schmidt")
            pdf[i] = pdf_p1_schmidt(request.schmidt_rank, request.a1, x);
        else if (request.kind == "p2_k")
            pdf[i] = pdf_p2_k(request.schmidt_rank, request.a2, x);
        else if (request.kind == "p2_exp")
            pdf[i] = pdf_p2_exponential(request.a2, x);
        else if (request.kind == "p1_general")
            pdf[i] = pdf_p1_general(request.spectrum, request.a1, x);
        else if (request.kind == "p2_general")
            pdf[i] = pdf_p2_general(request.spectrum, request.a2, x);
        else
            throw std::invalid_argument("unknown analytic kind: " + request.kind);
    }
    return pdf;
}

inline std::string cmd_analytic(const AnalyticRequest& request)
{
    const double scale =
        (request.kind == "p1_schmidt" || request.kind == "p1_general") ? request.a1
                                                                       : request.a2;
    const double lo = request.grid_min > 0.0 ? request.grid_min : 1e-4 * scale;
    const double hi = request.grid_max > 0.0 ? request.grid_max : 50.0 * scale;
    const auto grid = log_grid(lo, hi, request.grid_points);
    const auto pdf = analytic_curve(request, grid);
    detail::write_file(request.out_path, detail::curve_csv(grid, pdf));
    return request.out_path;
}

struct CompareReport {
    bool pass = false;
    nlohmann::json report;
};

// Simulate under `config` and test the sampled currents against an analytic
// reference family.  Moment checks run at 3 standard errors; KS checks run at
// 5% significance on the retained raw samples.
inline CompareReport cmd_compare(const ExperimentConfig& config, const std::string& kind)
{
    const StateEnsemble state = config.build_state();
    const ScaleParams scales = config.scales();
    const ReducedDensity rho1 = reduced_density(state);
    const SchmidtSpectrum spectrum = schmidt_spectrum(rho1);
    const double state_purity = purity(state);

    int schmidt_rank = 0;
    if (spectrum.clusters.size() == 1 && spectrum.clusters[0].multiplicity % 2 == 0)
        schmidt_rank = spectrum.clusters[0].multiplicity / 2;

    if ((kind == "p1_schmidt" || kind == "p2_k") && schmidt_rank == 0)
        throw std::invalid_argument(
            "state has no single 2M-fold Schmidt eigenvalue; " + kind +
            " reference does not apply");
    if (kind == "p2_general" && state_purity < 1.0 - 1e-9)
        throw std::invalid_argument("p2_general reference requires a pure state");

    SimulateResult sim = cmd_simulate(config);
    const SampleSet& samples = sim.samples;
    const std::uint64_t raw_n = samples.raw(Channel::I2).size();

    nlohmann::json checks = nlohmann::json::array();
    nlohmann::json ks_results = nlohmann::json::object();
    bool pass = true;
    auto add_check = [&](const std::string& name, double value, double threshold,
                         bool ok) {
        checks.push_back({{"name", name},
                          {"value", value},
                          {"threshold", threshold},
                          {"pass", ok}});
        if (name.rfind("ks_", 0) == 0)
            ks_results[name] = {{"distance", value}, {"threshold", threshold}, {"pass", ok}};
        pass = pass && ok;
    };
    auto moment_check = [&](const std::string& name, const Estimate& est, double expected) {
        const double delta = std::abs(est.value - expected);
        add_check(name, delta, 3.0 * est.std_error, delta <= 3.0 * est.std_error);
    };

    moment_check("mean_I1", mean_estimate(samples, Channel::I1), scales.a1);
    moment_check("mean_I2", mean_estimate(samples, Channel::I2), scales.a2);

    const double ks_threshold = ks_critical(0.05, raw_n);
    if (kind == "p2_k") {
        const int m = schmidt_rank;
        const auto cdf = ReferenceCdf::from_pdf(
            [&](double x) { return pdf_p2_k(m, scales.a2, x); }, 1e-9 * scales.a2,
            100.0 * scales.a2);
        const double dist = ks_distance(samples, Channel::I2, cdf);
        add_check("ks_I2", dist, ks_threshold, dist <= ks_threshold);
        moment_check("var_I2", variance_estimate(samples, Channel::I2),
                     scales.a2 * scales.a2 * (1.0 + 1.0 / m));
    } else if (kind == "p1_schmidt") {
        const int m = schmidt_rank;
        const auto cdf = ReferenceCdf::from_pdf(
            [&](double x) { return pdf_p1_schmidt(m, scales.a1, x); }, 1e-9 * scales.a1,
            100.0 * scales.a1);
        const double dist = ks_distance(samples, Channel::I1, cdf);
        add_check("ks_I1", dist, ks_threshold, dist <= ks_threshold);
        moment_check("var_I1", variance_estimate(samples, Channel::I1),
                     scales.a1 * scales.a1 / (2.0 * m));
    } else if (kind == "p2_exp") {
        const auto cdf = ReferenceCdf::from_pdf(
            [&](double x) { return pdf_p2_exponential(scales.a2, x); }, 1e-9 * scales.a2,
            200.0 * scales.a2);
        const double dist = ks_distance(samples, Channel::I2, cdf);
        add_check("ks_I2", dist, ks_threshold, dist <= ks_threshold);
    } else if (kind == "p1_general" || kind == "p2_general") {
        const bool single_photon = kind == "p1_general";
        auto pdf = [&](double x) {
            return single_photon ? pdf_p1_general(spectrum, scales.a1, x)
                                 : pdf_p2_general(spectrum, scales.a2, x);
        };
        const double scale = single_photon ? scales.a1 : scales.a2;
        const auto cdf = ReferenceCdf::from_pdf(pdf, 1e-9 * scale, 100.0 * scale);
        const Channel channel = single_photon ? Channel::I1 : Channel::I2;
        const double dist = ks_distance(samples, channel, cdf);
        add_check(single_photon ? "ks_I1" : "ks_I2", dist, ks_threshold,
                  dist <= ks_threshold);
    } else if (kind == "gaussian") {
        // Large-M fully mixed reference: matched first two moments plus a
        // skewness-based normality check.
        const double var_theory = scales.a2 * scales.a2 *
                                  (state_purity + 2.0 * rho1.purity());
        moment_check("var_I2", variance_estimate(samples, Channel::I2), var_theory);
        const double skew = skewness_estimate(samples, Channel::I2).value;
        add_check("skewness_I2", std::abs(skew), 0.2, std::abs(skew) < 0.2);
    } else {
        throw std::invalid_argument("unknown comparison kind: " + kind);
    }

    nlohmann::json report;
    report["reference"] = kind;
    report["n"] = samples.count();
    report["effective_raw_n"] = raw_n;
    report["checks"] = checks;
    report["verdict"] = pass ? "pass" : "fail";

    const std::filesystem::path dir(config.out_dir);
    detail::write_file(dir / (config.prefix + "_report.json"), report.dump(2) + "\n");
    if (!ks_results.empty()) {
        sim.summary["ks"] = ks_results;
        detail::write_file(dir / (config.prefix + "_summary.json"),
                           sim.summary.dump(2) + "\n");
    }
    return {pass, std::move(report)};
}

// Purity protocol: estimate Tr rho^2 from the two visibilities and report it
// against the exact ensemble value.
inline nlohmann::json cmd_purity(const ExperimentConfig& config)
{
    const StateEnsemble state = config.build_state();
    SampleSet samples = run_ensemble(config.model(), config.detector(), state,
                                     config.efficiencies(), config.run_settings());
    const Estimate est = purity_estimate(samples);
    const Estimate v1 = visibility(samples, Channel::I1);
    const Estimate v2 = visibility(samples, Channel::I2);
    nlohmann::json j;
    j["purity"] = est.value;
    j["purity_stderr"] = est.std_error;
    j["purity_exact"] = purity(state);
    j["V1"] = v1.value;
    j["V2"] = v2.value;
    j["n"] = samples.count();
    const std::filesystem::path path =
        std::filesystem::path(config.out_dir) / (config.prefix + "_purity.json");
    detail::write_file(path, j.dump(2) + "\n");
    return j;
}

}  // namespace qspeckle

#endif  // QSPECKLE_EXPERIMENT_HPP
