// Copyright 2026 The fockdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Monte Carlo trials of both detection schemes.
//
// Each trial draws the true photon number n from the initial distribution
// (only one number state is actually present in the cavity) and then plays
// out the measurement:
//
//  - discrete: ground-state atoms cross the cavity one after another and each
//    exits excited with probability q(n); the first excited atom removes one
//    photon and ends the trial. Nothing can be excited from the vacuum.
//  - continuous: the first count arrives after an exponential waiting time of
//    rate n*lambda; a count inside the observation window removes one photon.
//
// Records conditioned on a detection estimate the post-detection
// distribution. Every trial owns an RNG stream derived from (seed, index), and
// campaign reductions run in a fixed chunk order, so results do not depend on
// the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"
#include "fockdet/superops.hpp"

namespace fockdet {

enum class DetectionModel { Discrete, Continuous };

constexpr std::string_view to_string(DetectionModel m) noexcept {
    return m == DetectionModel::Discrete ? "discrete" : "continuous";
}

enum class EventKind { AtomGround, AtomExcited, Count, NoCountInterval };

constexpr std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::AtomGround: return "AtomGround";
        case EventKind::AtomExcited: return "AtomExcited";
        case EventKind::Count: return "Count";
        case EventKind::NoCountInterval: return "NoCountInterval";
    }
    return "Unknown";
}

/// One entry of a detection record.
///
///   AtomGround       `at` = index of the first atom of a run of `count`
///                    consecutive ground-state atoms
///   AtomExcited      `at` = atom index
///   Count            `at` = count time
///   NoCountInterval  `at` = interval length (may be +inf)
struct DetectionEvent {
    EventKind kind;
    double at = 0.0;
    std::uint64_t count = 1;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

struct DetectionRecord {
    DetectionModel model = DetectionModel::Discrete;
    std::vector<DetectionEvent> events;
    int initial_n = 0;
    int final_n = 0;
    std::uint64_t seed = 0;

    /// Number of events of a kind; ground-atom runs count every atom.
    std::uint64_t count(EventKind kind) const {
        std::uint64_t total = 0;
        for (const auto& e : events)
            if (e.kind == kind) total += e.count;
        return total;
    }

    bool detected() const {
        return count(model == DetectionModel::Discrete ? EventKind::AtomExcited : EventKind::Count) > 0;
    }

    /// A photon was present but the atom budget ran out before any excitation.
    bool truncation_anomaly() const {
        return model == DetectionModel::Discrete && initial_n > 0 && !detected();
    }

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Per-atom excitation probability q(n) given n photons; q(0) = 0.
class ExcitationProfile {
public:
    static ExcitationProfile from_table(std::vector<double> q) {
        FockDimension dim(static_cast<int>(q.size()));
        for (std::size_t n = 0; n < q.size(); ++n) {
            if (!(q[n] >= 0.0 && q[n] <= 1.0)) {
                throw Error(ErrorKind::InvalidArgument,
                            "excitation probability at n=" + std::to_string(n) + " must lie in [0, 1]");
            }
        }
        if (q[0] != 0.0) {
            throw Error(ErrorKind::InvalidArgument, "an atom cannot be excited by the vacuum: q(0) must be 0");
        }
        return ExcitationProfile(dim, std::move(q));
    }

    /// q(n) = value for n >= 1.
    static ExcitationProfile constant(double value, FockDimension dim) {
        std::vector<double> q(dim.size(), value);
        q[0] = 0.0;
        return from_table(std::move(q));
    }

    /// q(n) = n / (n + offset).
    static ExcitationProfile saturating(double offset, FockDimension dim) {
        if (!(offset > 0.0)) throw Error(ErrorKind::InvalidArgument, "saturation offset must be positive");
        std::vector<double> q(dim.size());
        for (std::size_t n = 0; n < q.size(); ++n) q[n] = double(n) / (double(n) + offset);
        return from_table(std::move(q));
    }

    FockDimension dim() const noexcept { return dim_; }
    double operator()(int n) const { return q_[std::size_t(n)]; }
    const std::vector<double>& values() const noexcept { return q_; }

private:
    ExcitationProfile(FockDimension dim, std::vector<double> q) : dim_(dim), q_(std::move(q)) {}

    FockDimension dim_;
    std::vector<double> q_;
};

struct AtomStreamConfig {
    ExcitationProfile excitation;
    std::uint64_t max_atoms = 10000;
    std::uint64_t seed = 0;

    /// Checks the budget and that q > 0 wherever p0 puts a photon.
    void validate_for(const PhotonDistribution& p0) const {
        detail::require_same_dim(p0.dim(), excitation.dim(), "atom stream");
        if (max_atoms < 1) throw Error(ErrorKind::InvalidArgument, "max_atoms must be at least 1");
        for (std::size_t n = 1; n < p0.size(); ++n) {
            if (p0[n] > 0.0 && excitation(int(n)) <= 0.0) {
                throw Error(ErrorKind::InvalidArgument,
                            "q(" + std::to_string(n) + ") must be positive on occupied levels");
            }
        }
    }
};

/// Seed of the RNG stream for one trial of a campaign.
inline std::uint64_t trial_seed(std::uint64_t campaign_seed, std::uint64_t trial) {
    // splitmix64 finalizer applied to a (seed, index) counter.
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(campaign_seed) ^ trial);
}

class TrialRng {
public:
    explicit TrialRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF sampler of photon numbers.
class LevelSampler {
public:
    explicit LevelSampler(const PhotonDistribution& p) : cdf_(p.size()) {
        double acc = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) cdf_[n] = acc += p[n];
    }

    int operator()(TrialRng& rng) const {
        const double u = rng.uniform() * cdf_.back();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return int(std::min<std::ptrdiff_t>(it - cdf_.begin(), std::ptrdiff_t(cdf_.size()) - 1));
    }

private:
    std::vector<double> cdf_;
};

namespace detail {

inline DetectionRecord discrete_trial(const LevelSampler& sampler, const ExcitationProfile& q,
                                      std::uint64_t max_atoms, std::uint64_t seed) {
    TrialRng rng(seed);
    DetectionRecord rec;
    rec.model = DetectionModel::Discrete;
    rec.seed = seed;
    rec.initial_n = rec.final_n = sampler(rng);

    const double q_n = q(rec.initial_n);
    std::uint64_t ground = 0;
    bool excited = false;
    if (q_n > 0.0) {
        for (; ground < max_atoms; ++ground) {
            if (rng.uniform() < q_n) {
                excited = true;
                break;
            }
        }
    } else {
        ground = max_atoms;
    }
    if (ground > 0) rec.events.push_back({EventKind::AtomGround, 0.0, ground});
    if (excited) {
        rec.events.push_back({EventKind::AtomExcited, double(ground), 1});
        rec.final_n -= 1;
    }
    return rec;
}

inline DetectionRecord continuous_trial(const LevelSampler& sampler, double lambda, double t_max,
                                        std::uint64_t seed) {
    TrialRng rng(seed);
    DetectionRecord rec;
    rec.model = DetectionModel::Continuous;
    rec.seed = seed;
    rec.initial_n = rec.final_n = sampler(rng);
    if (rec.initial_n > 0) {
        const double wait = -std::log1p(-rng.uniform()) / (double(rec.initial_n) * lambda);
        if (wait < t_max) {
            rec.events.push_back({EventKind::Count, wait, 1});
            rec.final_n -= 1;
            return rec;
        }
    }
    rec.events.push_back({EventKind::NoCountInterval, t_max, 1});
    return rec;
}

inline void require_window(double t_max) {
    if (!(t_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "observation window t_max must be positive");
}

}  // namespace detail

/// Sends ground-state atoms until one exits excited or `cfg.max_atoms` is
/// reached. A vacuum draw never produces an excitation.
inline DetectionRecord run_discrete_trial(const PhotonDistribution& p0, const AtomStreamConfig& cfg) {
    cfg.validate_for(p0);
    return detail::discrete_trial(LevelSampler(p0), cfg.excitation, cfg.max_atoms, cfg.seed);
}

/// Waits for the first count at rate n*lambda over the window [0, t_max).
/// `t_max` may be +infinity.
inline DetectionRecord run_continuous_trial(const PhotonDistribution& p0, const CouplingParams& params,
                                            double t_max, std::uint64_t seed) {
    params.validate();
    detail::require_window(t_max);
    return detail::continuous_trial(LevelSampler(p0), params.lambda, t_max, seed);
}

/// Commutative reduction of detection records.
class PosteriorAccumulator {
public:
    explicit PosteriorAccumulator(FockDimension dim) : histogram_(dim.size(), 0) {}

    void add(const DetectionRecord& rec) {
        if (rec.truncation_anomaly()) {
            ++anomalies_;
            return;
        }
        ++records_;
        if (!rec.detected()) return;
        if (rec.final_n < 0 || std::size_t(rec.final_n) >= histogram_.size()) {
            throw Error(ErrorKind::DimensionMismatch, "final photon number outside the histogram");
        }
        ++detections_;
        ++histogram_[std::size_t(rec.final_n)];
        for (const auto& e : rec.events) {
            if (e.kind == EventKind::Count) {
                time_sum_ += e.at;
                time_sq_sum_ += e.at * e.at;
            }
        }
    }

    void merge(const PosteriorAccumulator& other) {
        if (other.histogram_.size() != histogram_.size()) {
            throw Error(ErrorKind::DimensionMismatch, "merging accumulators of different dimension");
        }
        for (std::size_t n = 0; n < histogram_.size(); ++n) histogram_[n] += other.histogram_[n];
        records_ += other.records_;
        detections_ += other.detections_;
        anomalies_ += other.anomalies_;
        time_sum_ += other.time_sum_;
        time_sq_sum_ += other.time_sq_sum_;
    }

    const std::vector<std::uint64_t>& histogram() const noexcept { return histogram_; }
    std::uint64_t records() const noexcept { return records_; }
    std::uint64_t detections() const noexcept { return detections_; }
    std::uint64_t anomalies() const noexcept { return anomalies_; }
    double time_sum() const noexcept { return time_sum_; }
    double time_sq_sum() const noexcept { return time_sq_sum_; }

private:
    std::vector<std::uint64_t> histogram_;
    std::uint64_t records_ = 0;
    std::uint64_t detections_ = 0;
    std::uint64_t anomalies_ = 0;
    double time_sum_ = 0.0;
    double time_sq_sum_ = 0.0;
};

/// Post-detection distribution estimated from conditioned records. Standard
/// errors are binomial per bin; truncation anomalies are excluded everywhere
/// and only counted.
struct PosteriorEstimate {
    std::vector<double> p;
    std::vector<double> stderr_p;
    std::uint64_t records = 0;
    std::uint64_t detections = 0;
    std::uint64_t anomalies = 0;
    double fraction = 0.0;
    double fraction_stderr = 0.0;
    double mean = 0.0;
    double mean_stderr = 0.0;
    /// Mean first-count time over counted records (continuous only, else NaN).
    double mean_count_time = std::numeric_limits<double>::quiet_NaN();
    double count_time_stderr = std::numeric_limits<double>::quiet_NaN();
};

inline PosteriorEstimate estimate_posterior(const PosteriorAccumulator& acc) {
    if (acc.detections() == 0) {
        throw Error(ErrorKind::NoDetections, "no record contains a detection event");
    }
    const double total = double(acc.detections());
    PosteriorEstimate est;
    est.records = acc.records();
    est.detections = acc.detections();
    est.anomalies = acc.anomalies();
    est.p.resize(acc.histogram().size());
    est.stderr_p.resize(acc.histogram().size());
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t n = 0; n < est.p.size(); ++n) {
        const double f = double(acc.histogram()[n]) / total;
        est.p[n] = f;
        est.stderr_p[n] = std::sqrt(f * (1.0 - f) / total);
        m1 += double(n) * f;
        m2 += double(n) * double(n) * f;
    }
    const double sample_var = total > 1.0 ? (m2 - m1 * m1) * total / (total - 1.0) : 0.0;
    est.mean = m1;
    est.mean_stderr = std::sqrt(std::max(sample_var, 0.0) / total);
    est.fraction = total / double(acc.records());
    est.fraction_stderr = std::sqrt(est.fraction * (1.0 - est.fraction) / double(acc.records()));
    if (acc.time_sum() > 0.0) {
        const double tm = acc.time_sum() / total;
        const double tv = total > 1.0 ? (acc.time_sq_sum() / total - tm * tm) * total / (total - 1.0) : 0.0;
        est.mean_count_time = tm;
        est.count_time_stderr = std::sqrt(std::max(tv, 0.0) / total);
    }
    return est;
}

/// Histogram of final photon numbers over records that contain a detection.
/// Throws NoDetections if there are none.
inline PosteriorEstimate estimate_posterior(std::span<const DetectionRecord> records, FockDimension dim) {
    PosteriorAccumulator acc(dim);
    for (const auto& r : records) acc.add(r);
    return estimate_posterior(acc);
}

/// One line of structured text per record, for audit logs.
inline std::string to_json_line(const DetectionRecord& rec, std::uint64_t trial) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "{\"trial\":" << trial << ",\"model\":\"" << to_string(rec.model) << "\",\"seed\":" << rec.seed
        << ",\"initial_n\":" << rec.initial_n << ",\"final_n\":" << rec.final_n << ",\"events\":[";
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        const auto& e = rec.events[i];
        if (i) out << ',';
        out << "{\"kind\":\"" << to_string(e.kind) << "\",\"at\":";
        if (std::isinf(e.at)) out << "\"inf\""; else out << e.at;
        out << ",\"count\":" << e.count << '}';
    }
    out << "]}";
    return out.str();
}

using RecordSink = std::function<void(const DetectionRecord&, std::uint64_t trial)>;

struct CampaignOptions {
    std::uint64_t trials = 0;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned threads = 0;
    /// Receives every record in trial order when set.
    RecordSink sink;
};

namespace detail {

inline constexpr std::uint64_t kChunkTrials = 4096;

template <class TrialFn>
PosteriorAccumulator run_trials(FockDimension dim, const CampaignOptions& opts, TrialFn&& trial_fn) {
    if (opts.trials < 1) throw Error(ErrorKind::InvalidArgument, "a campaign needs at least one trial");
    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t n_chunks = (opts.trials + kChunkTrials - 1) / kChunkTrials;
    // Audit mode bounds memory by processing a few chunks per thread at a time.
    const std::uint64_t wave = opts.sink ? std::uint64_t(threads) * 4 : n_chunks;

    PosteriorAccumulator total(dim);
    for (std::uint64_t first = 0; first < n_chunks; first += wave) {
        const std::uint64_t last = std::min(n_chunks, first + wave);
        std::vector<PosteriorAccumulator> partial(last - first, PosteriorAccumulator(dim));
        std::vector<std::vector<DetectionRecord>> kept(opts.sink ? last - first : 0);
        std::atomic<std::uint64_t> next{first};

        auto worker = [&] {
            for (std::uint64_t c = next++; c < last; c = next++) {
                const std::uint64_t begin = c * kChunkTrials;
                const std::uint64_t end = std::min(opts.trials, begin + kChunkTrials);
                auto& acc = partial[c - first];
                for (std::uint64_t t = begin; t < end; ++t) {
                    DetectionRecord rec = trial_fn(t);
                    acc.add(rec);
                    if (opts.sink) kept[c - first].push_back(std::move(rec));
                }
            }
        };
        const unsigned n_workers = unsigned(std::min<std::uint64_t>(threads, last - first));
        if (n_workers <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(n_workers);
            for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        }
        for (std::uint64_t c = first; c < last; ++c) {
            total.merge(partial[c - first]);
            if (opts.sink) {
                std::uint64_t t = c * kChunkTrials;
                for (const auto& rec : kept[c - first]) opts.sink(rec, t++);
            }
        }
    }
    return total;
}

}  // namespace detail

/// Runs `opts.trials` discrete trials; trial i uses seed trial_seed(cfg.seed, i).
inline PosteriorAccumulator run_discrete_campaign(const PhotonDistribution& p0, const AtomStreamConfig& cfg,
                                                  const CampaignOptions& opts) {
    cfg.validate_for(p0);
    const LevelSampler sampler(p0);
    return detail::run_trials(p0.dim(), opts, [&](std::uint64_t t) {
        return detail::discrete_trial(sampler, cfg.excitation, cfg.max_atoms, trial_seed(cfg.seed, t));
    });
}

/// Runs `opts.trials` continuous trials; trial i uses seed trial_seed(seed, i).
inline PosteriorAccumulator run_continuous_campaign(const PhotonDistribution& p0, const CouplingParams& params,
                                                    double t_max, std::uint64_t seed,
                                                    const CampaignOptions& opts) {
    params.validate();
    detail::require_window(t_max);
    const LevelSampler sampler(p0);
    return detail::run_trials(p0.dim(), opts, [&](std::uint64_t t) {
        return detail::continuous_trial(sampler, params.lambda, t_max, trial_seed(seed, t));
    });
}

}  // namespace fockdet
