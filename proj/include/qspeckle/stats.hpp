// Copyright (c) 2026 the qspeckle developers.
// SPDX-License-Identifier: Apache-2.0

#ifndef QSPECKLE_STATS_HPP
#define QSPECKLE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qspeckle {

enum class Channel { I1, I2 };

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct HistogramSpec {
    int bins = 64;
    double lo = 0.0;
    double hi = 1.0;
    bool log_bins = false;
};

// Binned counts with separate underflow/overflow tracking.  Density uses
// count/(N * width) with N the total number of samples offered.
class Histogram {
  public:
    explicit Histogram(const HistogramSpec& spec) : spec_(spec), counts_(spec.bins, 0)
    {
        if (spec.bins < 2) throw std::invalid_argument("histogram needs >= 2 bins");
        if (!(spec.hi > spec.lo)) throw std::invalid_argument("histogram range is empty");
        if (spec.log_bins && !(spec.lo > 0.0))
            throw std::invalid_argument("log-binned histogram needs lo > 0");
    }

    void add(double x)
    {
        ++total_;
        if (x < spec_.lo) {
            ++underflow_;
            return;
        }
        if (x >= spec_.hi) {
            ++overflow_;
            return;
        }
        int bin;
        if (spec_.log_bins)
            bin = static_cast<int>(std::log(x / spec_.lo) / std::log(spec_.hi / spec_.lo) *
                                   spec_.bins);
        else
            bin = static_cast<int>((x - spec_.lo) / (spec_.hi - spec_.lo) * spec_.bins);
        bin = std::clamp(bin, 0, spec_.bins - 1);
        ++counts_[bin];
    }

    void merge(const Histogram& other)
    {
        if (other.spec_.bins != spec_.bins || other.spec_.lo != spec_.lo ||
            other.spec_.hi != spec_.hi || other.spec_.log_bins != spec_.log_bins)
            throw std::invalid_argument("histogram configurations differ");
        for (int i = 0; i < spec_.bins; ++i) counts_[i] += other.counts_[i];
        underflow_ += other.underflow_;
        overflow_ += other.overflow_;
        total_ += other.total_;
    }

    double edge(int i) const
    {
        if (spec_.log_bins)
            return spec_.lo * std::pow(spec_.hi / spec_.lo,
                                       static_cast<double>(i) / spec_.bins);
        return spec_.lo + (spec_.hi - spec_.lo) * i / spec_.bins;
    }

    double density(int i) const
    {
        if (total_ == 0) return 0.0;
        const double width = edge(i + 1) - edge(i);
        return static_cast<double>(counts_[i]) / (static_cast<double>(total_) * width);
    }

    const HistogramSpec& spec() const { return spec_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t underflow() const { return underflow_; }
    std::uint64_t overflow() const { return overflow_; }
    std::uint64_t total() const { return total_; }

  private:
    HistogramSpec spec_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t underflow_ = 0;
    std::uint64_t overflow_ = 0;
    std::uint64_t total_ = 0;
};

namespace detail {

struct ChannelSums {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;

    void add(double x)
    {
        const double x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
    }
};

struct BlockSums {
    int block = 0;
    std::uint64_t count = 0;
    double i1_s1 = 0.0, i1_s2 = 0.0, i2_s1 = 0.0, i2_s2 = 0.0;
};

// Accumulated statistics of one contiguous range of trials.
struct TrialChunk {
    std::uint64_t first = 0;
    std::uint64_t count = 0;
    ChannelSums i1, i2;
    std::vector<BlockSums> blocks;  // ascending block ids, usually 1-2 entries
    std::vector<std::uint64_t> raw_trials;
    std::vector<double> raw_i1, raw_i2;
};

}  // namespace detail

// Raw moments m_k = <x^k>, k = 1..4.
struct Moments {
    std::uint64_t n = 0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

    double variance() const { return m2 - m1 * m1; }
    double central3() const { return m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1; }
    double central4() const
    {
        return m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    }
};

// Monte Carlo sample accumulator for the two current channels.
//
// Statistics are kept per fixed-size trial chunk and reduced in trial order
// when queried, so results are bit-identical however the trials were sharded
// across workers and however partial sets were merged.  Raw samples are
// retained up to `raw_cap` by deterministic stride subsampling (trial_id
// divisible by the stride), which keeps retention independent of execution
// order as well.
class SampleSet {
  public:
    static constexpr std::uint64_t kChunkTrials = 8192;

    struct Config {
        std::uint64_t planned_trials = 0;
        int jackknife_blocks = 100;
        std::uint64_t raw_cap = 1'000'000;
        std::optional<HistogramSpec> hist_i1;
        std::optional<HistogramSpec> hist_i2;

        bool operator==(const Config& other) const
        {
            return planned_trials == other.planned_trials &&
                   jackknife_blocks == other.jackknife_blocks && raw_cap == other.raw_cap;
        }
    };

    explicit SampleSet(Config config) : config_(config)
    {
        if (config_.planned_trials < 1)
            throw std::invalid_argument("sample set needs planned_trials >= 1");
        if (config_.jackknife_blocks < 2)
            throw std::invalid_argument("sample set needs >= 2 jackknife blocks");
        config_.jackknife_blocks = static_cast<int>(std::min<std::uint64_t>(
            config_.jackknife_blocks, config_.planned_trials));
        raw_stride_ = config_.raw_cap == 0
                          ? 0
                          : (config_.planned_trials + config_.raw_cap - 1) / config_.raw_cap;
        if (config_.hist_i1) hist_i1_.emplace(*config_.hist_i1);
        if (config_.hist_i2) hist_i2_.emplace(*config_.hist_i2);
    }

    // Record one trial.  Trial ids must be offered in increasing order within
    // one SampleSet; disjoint id ranges live in separate sets and meet in
    // merge().
    void add(std::uint64_t trial_id, double i1, double i2)
    {
        if (trial_id >= config_.planned_trials)
            throw std::invalid_argument("trial id beyond planned trials");
        bool start_new = chunks_.empty();
        if (!start_new) {
            const auto& last = chunks_.back();
            if (trial_id < last.first + last.count)
                throw std::invalid_argument("trial ids must increase within a sample set");
            // break chunks at gaps and at the aligned chunk boundaries the
            // parallel runner shards on
            start_new = trial_id != last.first + last.count ||
                        trial_id / kChunkTrials != last.first / kChunkTrials;
        }
        if (start_new) {
            chunks_.emplace_back();
            chunks_.back().first = trial_id;
        }
        auto& chunk = chunks_.back();
        ++chunk.count;
        chunk.i1.add(i1);
        chunk.i2.add(i2);

        const int block = static_cast<int>(trial_id * config_.jackknife_blocks /
                                           config_.planned_trials);
        if (chunk.blocks.empty() || chunk.blocks.back().block != block)
            chunk.blocks.push_back({block, 0, 0.0, 0.0, 0.0, 0.0});
        auto& bs = chunk.blocks.back();
        ++bs.count;
        bs.i1_s1 += i1;
        bs.i1_s2 += i1 * i1;
        bs.i2_s1 += i2;
        bs.i2_s2 += i2 * i2;

        if (raw_stride_ > 0 && trial_id % raw_stride_ == 0) {
            chunk.raw_trials.push_back(trial_id);
            chunk.raw_i1.push_back(i1);
            chunk.raw_i2.push_back(i2);
        }
        if (hist_i1_) hist_i1_->add(i1);
        if (hist_i2_) hist_i2_->add(i2);
    }

    // Combine with a set covering a disjoint trial range.  Chunks keep their
    // per-range sums, so any merge grouping yields identical final results.
    void merge(SampleSet&& other)
    {
        if (!(config_ == other.config_))
            throw std::invalid_argument("sample set configurations differ");
        std::vector<detail::TrialChunk> merged;
        merged.reserve(chunks_.size() + other.chunks_.size());
        std::size_t a = 0, b = 0;
        while (a < chunks_.size() || b < other.chunks_.size()) {
            const bool take_a =
                b >= other.chunks_.size() ||
                (a < chunks_.size() && chunks_[a].first < other.chunks_[b].first);
            auto& src = take_a ? chunks_[a++] : other.chunks_[b++];
            if (!merged.empty() &&
                merged.back().first + merged.back().count > src.first)
                throw std::invalid_argument("sample sets overlap in trial ranges");
            merged.push_back(std::move(src));
        }
        chunks_ = std::move(merged);
        if (hist_i1_.has_value() != other.hist_i1_.has_value() ||
            hist_i2_.has_value() != other.hist_i2_.has_value())
            throw std::invalid_argument("sample set histogram configurations differ");
        if (hist_i1_) hist_i1_->merge(*other.hist_i1_);
        if (hist_i2_) hist_i2_->merge(*other.hist_i2_);
    }

    std::uint64_t count() const
    {
        std::uint64_t n = 0;
        for (const auto& c : chunks_) n += c.count;
        return n;
    }

    Moments moments(Channel channel) const
    {
        Moments m;
        double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
        for (const auto& c : chunks_) {
            const auto& s = channel == Channel::I1 ? c.i1 : c.i2;
            s1 += s.s1;
            s2 += s.s2;
            s3 += s.s3;
            s4 += s.s4;
            m.n += c.count;
        }
        if (m.n == 0) throw std::logic_error("no samples accumulated");
        const double n = static_cast<double>(m.n);
        m.m1 = s1 / n;
        m.m2 = s2 / n;
        m.m3 = s3 / n;
        m.m4 = s4 / n;
        return m;
    }

    // Per-block (count, sum, sum of squares) for both channels, in block order.
    std::vector<detail::BlockSums> block_sums() const
    {
        std::vector<detail::BlockSums> blocks(config_.jackknife_blocks);
        for (int i = 0; i < config_.jackknife_blocks; ++i) blocks[i].block = i;
        for (const auto& c : chunks_)
            for (const auto& bs : c.blocks) {
                auto& dst = blocks[bs.block];
                dst.count += bs.count;
                dst.i1_s1 += bs.i1_s1;
                dst.i1_s2 += bs.i1_s2;
                dst.i2_s1 += bs.i2_s1;
                dst.i2_s2 += bs.i2_s2;
            }
        return blocks;
    }

    bool has_raw() const { return raw_stride_ > 0; }
    std::uint64_t raw_stride() const { return raw_stride_; }

    std::vector<double> raw(Channel channel) const
    {
        std::vector<double> out;
        for (const auto& c : chunks_) {
            const auto& src = channel == Channel::I1 ? c.raw_i1 : c.raw_i2;
            out.insert(out.end(), src.begin(), src.end());
        }
        return out;
    }

    std::vector<std::uint64_t> raw_trials() const
    {
        std::vector<std::uint64_t> out;
        for (const auto& c : chunks_)
            out.insert(out.end(), c.raw_trials.begin(), c.raw_trials.end());
        return out;
    }

    const std::optional<Histogram>& hist(Channel channel) const
    {
        return channel == Channel::I1 ? hist_i1_ : hist_i2_;
    }

    const Config& config() const { return config_; }

  private:
    Config config_;
    std::uint64_t raw_stride_ = 1;
    std::vector<detail::TrialChunk> chunks_;
    std::optional<Histogram> hist_i1_;
    std::optional<Histogram> hist_i2_;
};

// Convenience constructor for plain sample vectors (tests, external data).
inline SampleSet make_sample_set(std::span<const double> i1, std::span<const double> i2,
                                 SampleSet::Config config = {})
{
    if (i1.size() != i2.size() || i1.empty())
        throw std::invalid_argument("channels need matching nonempty sample counts");
    config.planned_trials = i1.size();
    SampleSet set(config);
    for (std::size_t t = 0; t < i1.size(); ++t) set.add(t, i1[t], i2[t]);
    return set;
}

inline Estimate mean_estimate(const SampleSet& samples, Channel channel)
{
    const Moments m = samples.moments(channel);
    return {m.m1, std::sqrt(std::max(m.variance(), 0.0) / static_cast<double>(m.n))};
}

inline Estimate variance_estimate(const SampleSet& samples, Channel channel)
{
    const Moments m = samples.moments(channel);
    const double var_of_var = std::max(m.central4() - m.variance() * m.variance(), 0.0);
    return {m.variance(), std::sqrt(var_of_var / static_cast<double>(m.n))};
}

// Speckle visibility V = <I^2>/<I>^2 - 1 with a delta-method standard error
// built from the third and fourth moments.
inline Estimate visibility(const SampleSet& samples, Channel channel)
{
    if (samples.count() < 100)
        throw std::invalid_argument("visibility needs at least 100 samples");
    const Moments m = samples.moments(channel);
    if (m.m1 == 0.0) throw std::invalid_argument("visibility undefined for zero mean");
    const double value = m.m2 / (m.m1 * m.m1) - 1.0;
    // gradient of m2/m1^2 in (m1, m2)
    const double d1 = -2.0 * m.m2 / (m.m1 * m.m1 * m.m1);
    const double d2 = 1.0 / (m.m1 * m.m1);
    const double cov11 = m.variance();
    const double cov12 = m.m3 - m.m1 * m.m2;
    const double cov22 = m.m4 - m.m2 * m.m2;
    const double var =
        (d1 * d1 * cov11 + 2.0 * d1 * d2 * cov12 + d2 * d2 * cov22) /
        static_cast<double>(m.n);
    return {value, std::sqrt(std::max(var, 0.0))};
}

// Purity estimator P = V2 - 2 V1; the standard error is a delete-one-block
// jackknife over the trial blocks.
inline Estimate purity_estimate(const SampleSet& samples)
{
    if (samples.count() < 100)
        throw std::invalid_argument("purity estimate needs at least 100 samples");
    const Moments m1 = samples.moments(Channel::I1);
    const Moments m2 = samples.moments(Channel::I2);
    auto vis = [](double s1, double s2, double n) {
        const double mean = s1 / n;
        return s2 / n / (mean * mean) - 1.0;
    };
    const auto blocks = samples.block_sums();
    const double n_total = static_cast<double>(samples.count());
    const double i1_s1 = m1.m1 * n_total, i1_s2 = m1.m2 * n_total;
    const double i2_s1 = m2.m1 * n_total, i2_s2 = m2.m2 * n_total;
    const double value = vis(i2_s1, i2_s2, n_total) - 2.0 * vis(i1_s1, i1_s2, n_total);

    std::vector<double> leave_out;
    leave_out.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.count == 0) continue;
        const double n = n_total - static_cast<double>(b.count);
        if (n < 2) continue;
        const double v2 = vis(i2_s1 - b.i2_s1, i2_s2 - b.i2_s2, n);
        const double v1 = vis(i1_s1 - b.i1_s1, i1_s2 - b.i1_s2, n);
        leave_out.push_back(v2 - 2.0 * v1);
    }
    const double nb = static_cast<double>(leave_out.size());
    if (nb < 2) return {value, std::numeric_limits<double>::quiet_NaN()};
    double mean = 0.0;
    for (double p : leave_out) mean += p;
    mean /= nb;
    double ss = 0.0;
    for (double p : leave_out) ss += (p - mean) * (p - mean);
    return {value, std::sqrt((nb - 1.0) / nb * ss)};
}

// Standardized third moment; the standard error is the normal-theory
// approximation sqrt(6/n).
inline Estimate skewness_estimate(const SampleSet& samples, Channel channel)
{
    const Moments m = samples.moments(channel);
    const double var = m.variance();
    if (!(var > 0.0)) throw std::invalid_argument("skewness undefined for constant samples");
    return {m.central3() / std::pow(var, 1.5), std::sqrt(6.0 / static_cast<double>(m.n))};
}

inline Estimate excess_kurtosis_estimate(const SampleSet& samples, Channel channel)
{
    const Moments m = samples.moments(channel);
    const double var = m.variance();
    if (!(var > 0.0)) throw std::invalid_argument("kurtosis undefined for constant samples");
    return {m.central4() / (var * var) - 3.0, std::sqrt(24.0 / static_cast<double>(m.n))};
}

// Build a histogram from the retained raw samples.
inline Histogram histogram(const SampleSet& samples, Channel channel,
                           const HistogramSpec& spec)
{
    const auto raw = samples.raw(channel);
    if (raw.empty()) throw std::invalid_argument("histogram needs retained raw samples");
    Histogram hist(spec);
    for (double x : raw) hist.add(x);
    return hist;
}

// One-sample Kolmogorov-Smirnov distance between the retained raw samples and
// a reference CDF.  The reference is checked for monotonicity on the sample
// points.
inline double ks_distance(const SampleSet& samples, Channel channel,
                          const std::function<double(double)>& reference_cdf)
{
    std::vector<double> sorted = samples.raw(channel);
    if (sorted.empty()) throw std::invalid_argument("ks distance needs retained raw samples");
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double dist = 0.0;
    double prev_f = -1.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = reference_cdf(sorted[i]);
        if (f < prev_f - 1e-12 || f < -1e-12 || f > 1.0 + 1e-12)
            throw std::invalid_argument("reference is not a valid CDF");
        prev_f = f;
        dist = std::max({dist, f - static_cast<double>(i) / n,
                         static_cast<double>(i + 1) / n - f});
    }
    return std::min(dist, 1.0);
}

// Two-sample Kolmogorov-Smirnov distance between raw channels of two sets.
inline double ks_two_sample(const SampleSet& a, Channel channel_a, const SampleSet& b,
                            Channel channel_b)
{
    std::vector<double> xa = a.raw(channel_a);
    std::vector<double> xb = b.raw(channel_b);
    if (xa.empty() || xb.empty())
        throw std::invalid_argument("ks distance needs retained raw samples");
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    const double na = static_cast<double>(xa.size());
    const double nb = static_cast<double>(xb.size());
    double dist = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < xa.size() && ib < xb.size()) {
        const double x = std::min(xa[ia], xb[ib]);
        while (ia < xa.size() && xa[ia] <= x) ++ia;
        while (ib < xb.size() && xb[ib] <= x) ++ib;
        dist = std::max(dist, std::abs(ia / na - ib / nb));
    }
    return dist;
}

// Critical KS distance at significance alpha (asymptotic inversion of the
// Kolmogorov tail 2 exp(-2 x^2)).
inline double ks_critical(double alpha, std::uint64_t n)
{
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("significance must be in (0, 1)");
    return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(double alpha, std::uint64_t n, std::uint64_t m)
{
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("significance must be in (0, 1)");
    const double en = static_cast<double>(n) * static_cast<double>(m) /
                      static_cast<double>(n + m);
    return std::sqrt(-0.5 * std::log(0.5 * alpha) / en);
}

}  // namespace qspeckle

#endif  // QSPECKLE_STATS_HPP
