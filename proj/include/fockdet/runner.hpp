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

// Scenario execution: superoperator pipelines and Monte Carlo campaigns, with
// CSV and JSON writers. Numbers are written with 12 significant digits.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fockdet/bayes.hpp"
#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"
#include "fockdet/scenario.hpp"
#include "fockdet/statistics.hpp"
#include "fockdet/superops.hpp"
#include "fockdet/trajectory.hpp"

namespace fockdet {

/// A domain error raised while applying operation `step` of a pipeline.
class StepError : public Error {
public:
    StepError(const Error& cause, std::size_t step, const std::string& op)
        : Error(cause.kind(), "step " + std::to_string(step) + " (" + op + "): " + strip(cause.what(), cause.kind())),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    static std::string strip(const std::string& what, ErrorKind kind) {
        const std::string prefix = std::string(to_string(kind)) + ": ";
        return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
    }

    std::size_t step_;
};

inline std::string describe(const OperationSpec& op) {
    std::ostringstream out;
    out << std::setprecision(12);
    switch (op.kind) {
        case OperationKind::Subtract: out << "subtract " << op.n; break;
        case OperationKind::Add: out << "add " << op.n; break;
        case OperationKind::OneCount: out << "one_count"; break;
        case OperationKind::NoCount: out << "no_count tau=" << op.tau; break;
        case OperationKind::Phase: out << "phase phi=" << op.phi; break;
        case OperationKind::Imperfect:
            out << "imperfect " << (op.efficiency.direction == ShiftDirection::Subtract ? "subtract" : "add");
            for (const auto& [n, w] : op.efficiency.alpha) out << ' ' << n << ':' << w;
            break;
    }
    return out.str();
}

struct StateReport {
    std::vector<double> p;
    double trace = 1.0;
    MomentSummary moments;
};

struct StepReport {
    std::size_t index = 0;
    std::string operation;
    StateReport state;
    /// Closed-form distribution update applied to the previous distribution.
    std::vector<double> predicted_p;
    double max_abs_diff_p = 0.0;
    /// Closed-form post-detection mean (single subtraction or one count only).
    std::optional<double> predicted_mean;
    std::optional<double> mean_abs_diff;
};

struct PipelineResult {
    DetectionModel model = DetectionModel::Discrete;
    int dim = 2;
    double tail_mass = 0.0;
    StateReport initial;
    std::vector<StepReport> steps;
};

namespace detail {

inline StateReport report_state(const DensityMatrix& rho) {
    const PhotonDistribution p = diagonal_part(rho);
    return {p.values(), rho.matrix().trace().real(), moments(p)};
}

inline DensityMatrix apply(const DensityMatrix& rho, const OperationSpec& op, const Scenario& s) {
    switch (op.kind) {
        case OperationKind::Subtract: return op.n == 1 ? subtract_one(rho) : subtract_photons(rho, op.n);
        case OperationKind::Add: return add_photons(rho, op.n);
        case OperationKind::OneCount: return one_count(rho);
        case OperationKind::NoCount: return no_count(rho, CouplingParams{s.coupling->lambda, op.tau});
        case OperationKind::Phase: return phase_shift(rho, op.phi);
        case OperationKind::Imperfect: return imperfect_detection(rho, op.efficiency);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown operation");
}

inline PhotonDistribution predict(const PhotonDistribution& p, const OperationSpec& op, const Scenario& s) {
    switch (op.kind) {
        case OperationKind::Subtract:
            return op.n == 1 ? closed_form::subtract_one(p) : closed_form::subtract_photons(p, op.n);
        case OperationKind::Add: return closed_form::add_photons(p, op.n);
        case OperationKind::OneCount: return closed_form::one_count(p);
        case OperationKind::NoCount: return closed_form::no_count(p, CouplingParams{s.coupling->lambda, op.tau});
        case OperationKind::Phase: return p;
        case OperationKind::Imperfect: return closed_form::imperfect_detection(p, op.efficiency);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown operation");
}

}  // namespace detail

/// Applies the scenario's operations in order to its initial state.
/// Domain errors are rethrown as StepError carrying the step index.
inline PipelineResult run_pipeline(const Scenario& s) {
    validate(s);
    const FockDimension dim(s.dim);
    const GeneratedState init = make_state(s.initial_state, dim);
    PipelineResult result;
    result.model = s.model;
    result.dim = s.dim;
    result.tail_mass = init.tail_mass;

    DensityMatrix rho = from_distribution(init.distribution);
    result.initial = detail::report_state(rho);
    for (std::size_t i = 0; i < s.operations.size(); ++i) {
        const OperationSpec& op = s.operations[i];
        StepReport step;
        step.index = i;
        step.operation = describe(op);
        try {
            const PhotonDistribution before = diagonal_part(rho);
            const MomentSummary before_m = moments(before);
            rho = detail::apply(rho, op, s);
            step.state = detail::report_state(rho);
            step.predicted_p = detail::predict(before, op, s).values();
            for (std::size_t n = 0; n < step.predicted_p.size(); ++n) {
                step.max_abs_diff_p =
                    std::max(step.max_abs_diff_p, std::abs(step.predicted_p[n] - step.state.p[n]));
            }
            if (op.kind == OperationKind::Subtract && op.n == 1) {
                step.predicted_mean = predict_discrete_mean(before_m);
            } else if (op.kind == OperationKind::OneCount) {
                step.predicted_mean = predict_continuous_mean(before_m);
            }
            if (step.predicted_mean) step.mean_abs_diff = std::abs(*step.predicted_mean - step.state.moments.mean);
        } catch (const Error& e) {
            throw StepError(e, i, step.operation);
        }
        result.steps.push_back(std::move(step));
    }
    return result;
}

struct BinComparison {
    double estimate = 0.0;
    double stderr_estimate = 0.0;
    double target = 0.0;
    double z = 0.0;
};

struct CampaignResult {
    DetectionModel model = DetectionModel::Discrete;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    PosteriorEstimate estimate;
    /// Per-bin comparison against the closed-form one-detection update.
    std::vector<BinComparison> posterior;
    BinComparison mean;
    BinComparison fraction;
    /// Continuous model only: exact Bayes posterior for a first count inside
    /// the finite window [0, t_max); tends to the closed form as t_max -> 0.
    std::vector<BinComparison> window_posterior;
    std::optional<BinComparison> window_mean;
    std::optional<double> t_max;
};

/// Score z of a proportion against its target, using the target's binomial
/// spread. A zero-variance target gives 0 on exact agreement, else +-inf.
inline double proportion_z(double estimate, double target, double samples) {
    const double var = target * (1.0 - target) / samples;
    if (var <= 0.0) {
        if (estimate == target) return 0.0;
        return estimate > target ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    }
    return (estimate - target) / std::sqrt(var);
}

inline double mean_z(double estimate, double stderr_estimate, double target) {
    if (stderr_estimate <= 0.0) {
        if (estimate == target) return 0.0;
        return estimate > target ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    }
    return (estimate - target) / stderr_estimate;
}

namespace detail {

inline std::vector<BinComparison> compare_bins(const PosteriorEstimate& est, const PhotonDistribution& target) {
    std::vector<BinComparison> out(est.p.size());
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = {est.p[n], est.stderr_p[n], target[n], proportion_z(est.p[n], target[n], double(est.detections))};
    }
    return out;
}

}  // namespace detail

/// Simulates the scenario's detection model on its initial state and compares
/// the conditioned posterior with the closed-form predictions.
inline CampaignResult run_campaign(const Scenario& s, unsigned threads = 0, const RecordSink& sink = {}) {
    validate(s);
    if (s.trials < 1) detail::invalid("trials", "a campaign needs at least one trial");
    const FockDimension dim(s.dim);
    const PhotonDistribution p0 = make_state(s.initial_state, dim).distribution;
    const MomentSummary m0 = moments(p0);
    const CampaignSpec camp = s.campaign.value_or(CampaignSpec{});
    CampaignOptions opts{s.trials, threads, sink};

    CampaignResult result;
    result.model = s.model;
    result.trials = s.trials;
    result.seed = s.seed;

    PhotonDistribution target = p0;
    double target_mean = 0.0;
    double expected_fraction = 1.0 - p0[0];
    std::optional<PhotonDistribution> window_target;
    try {
        if (s.model == DetectionModel::Discrete) {
            if (!camp.excitation) detail::invalid("campaign.excitation", "required for a discrete campaign");
            const AtomStreamConfig cfg{camp.excitation->build(dim), camp.max_atoms, s.seed};
            result.estimate = estimate_posterior(run_discrete_campaign(p0, cfg, opts));
            target = closed_form::subtract_one(p0);
            target_mean = predict_discrete_mean(m0);
        } else {
            if (!camp.t_max) detail::invalid("campaign.t_max", "required for a continuous campaign");
            const double t_max = *camp.t_max;
            const CouplingParams params{s.coupling->lambda, 0.0};
            result.t_max = t_max;
            result.estimate = estimate_posterior(run_continuous_campaign(p0, params, t_max, s.seed, opts));
            target = closed_form::one_count(p0);
            target_mean = predict_continuous_mean(m0);
            std::vector<double> likelihood(dim.size());
            expected_fraction = 0.0;
            for (std::size_t n = 0; n < likelihood.size(); ++n) {
                likelihood[n] = std::isinf(t_max) ? (n > 0 ? 1.0 : 0.0)
                                                  : -std::expm1(-double(n) * params.lambda * t_max);
                expected_fraction += p0[n] * likelihood[n];
            }
            window_target = downshift(posterior(p0, ConditionalModel::from_likelihood(likelihood)));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Validation) throw;
        throw Error(e.kind(), std::string("campaign: ") + e.what());
    }

    const PosteriorEstimate& est = result.estimate;
    result.posterior = detail::compare_bins(est, target);
    result.mean = {est.mean, est.mean_stderr, target_mean, mean_z(est.mean, est.mean_stderr, target_mean)};
    result.fraction = {est.fraction, est.fraction_stderr, expected_fraction,
                       proportion_z(est.fraction, expected_fraction, double(est.records))};
    if (window_target) {
        result.window_posterior = detail::compare_bins(est, *window_target);
        const double wm = moments(*window_target).mean;
        result.window_mean = BinComparison{est.mean, est.mean_stderr, wm, mean_z(est.mean, est.mean_stderr, wm)};
    }
    return result;
}

// ---------------------------------------------------------------------------
// Output

/// x rounded to 12 significant digits (non-finite values pass through).
inline double round_sig12(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    std::ostringstream out;
    out << std::setprecision(12) << x;
    return std::stod(out.str());
}

inline std::string fmt12(double x) {
    std::ostringstream out;
    out << std::setprecision(12) << x;
    return out.str();
}

namespace detail {

inline Json num(double x) { return std::isfinite(x) ? Json(round_sig12(x)) : Json(nullptr); }

inline Json nums(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline Json state_json(const StateReport& s) {
    return {{"p", nums(s.p)},
            {"trace", num(s.trace)},
            {"mean", num(s.moments.mean)},
            {"variance", num(s.moments.variance)},
            {"vacuum_prob", num(s.moments.vacuum_prob)}};
}

inline Json bin_json(const BinComparison& b) {
    return {{"estimate", num(b.estimate)}, {"stderr", num(b.stderr_estimate)}, {"target", num(b.target)}, {"z", num(b.z)}};
}

inline Json bins_json(const std::vector<BinComparison>& bins) {
    Json a = Json::array();
    for (std::size_t n = 0; n < bins.size(); ++n) {
        Json b = bin_json(bins[n]);
        b["n"] = n;
        a.push_back(b);
    }
    return a;
}

inline double max_abs_z(const std::vector<BinComparison>& bins) {
    double worst = 0.0;
    for (const auto& b : bins) worst = std::max(worst, std::abs(b.z));
    return worst;
}

}  // namespace detail

inline Json to_json(const PipelineResult& r) {
    Json j;
    j["command"] = "pipeline";
    j["model"] = std::string(to_string(r.model));
    j["dim"] = r.dim;
    j["tail_mass"] = detail::num(r.tail_mass);
    j["initial"] = detail::state_json(r.initial);
    j["steps"] = Json::array();
    for (const auto& st : r.steps) {
        Json s;
        s["step"] = st.index;
        s["operation"] = st.operation;
        s["state"] = detail::state_json(st.state);
        s["predicted_p"] = detail::nums(st.predicted_p);
        s["max_abs_diff_p"] = detail::num(st.max_abs_diff_p);
        s["predicted_mean"] = st.predicted_mean ? detail::num(*st.predicted_mean) : Json(nullptr);
        s["mean_abs_diff"] = st.mean_abs_diff ? detail::num(*st.mean_abs_diff) : Json(nullptr);
        j["steps"].push_back(s);
    }
    return j;
}

inline Json to_json(const CampaignResult& r) {
    const PosteriorEstimate& e = r.estimate;
    Json j;
    j["command"] = "campaign";
    j["model"] = std::string(to_string(r.model));
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    if (r.t_max) j["t_max"] = std::isinf(*r.t_max) ? Json("inf") : detail::num(*r.t_max);
    j["records"] = e.records;
    j["detections"] = e.detections;
    j["anomalies"] = e.anomalies;
    j["conditioning_fraction"] = detail::bin_json(r.fraction);
    j["conditioned_mean"] = detail::bin_json(r.mean);
    j["posterior"] = detail::bins_json(r.posterior);
    j["max_abs_z"] = detail::num(detail::max_abs_z(r.posterior));
    if (!r.window_posterior.empty()) {
        j["window_posterior"] = detail::bins_json(r.window_posterior);
        j["window_max_abs_z"] = detail::num(detail::max_abs_z(r.window_posterior));
        j["window_mean"] = detail::bin_json(*r.window_mean);
    }
    if (std::isfinite(e.mean_count_time)) {
        j["mean_count_time"] = {{"estimate", detail::num(e.mean_count_time)},
                                {"stderr", detail::num(e.count_time_stderr)}};
    }
    return j;
}

/// Long-format table: step,operation,quantity,n,computed,predicted,abs_diff.
inline void write_csv(std::ostream& out, const PipelineResult& r) {
    out << "step,operation,quantity,n,computed,predicted,abs_diff\n";
    auto row = [&](const std::string& step, const std::string& op, const char* quantity, std::optional<std::size_t> n,
                   double computed, std::optional<double> predicted) {
        out << step << ',' << op << ',' << quantity << ',' << (n ? std::to_string(*n) : "") << ','
            << fmt12(computed) << ',';
        if (predicted) out << fmt12(*predicted) << ',' << fmt12(std::abs(*predicted - computed));
        else out << ',';
        out << '\n';
    };
    auto state_rows = [&](const std::string& step, const std::string& op, const StateReport& s,
                          const std::vector<double>* predicted_p, std::optional<double> predicted_mean) {
        for (std::size_t n = 0; n < s.p.size(); ++n) {
            row(step, op, "p", n, s.p[n], predicted_p ? std::optional<double>((*predicted_p)[n]) : std::nullopt);
        }
        row(step, op, "trace", std::nullopt, s.trace, std::nullopt);
        row(step, op, "mean", std::nullopt, s.moments.mean, predicted_mean);
        row(step, op, "variance", std::nullopt, s.moments.variance, std::nullopt);
        row(step, op, "vacuum_prob", std::nullopt, s.moments.vacuum_prob, std::nullopt);
    };
    state_rows("initial", "", r.initial, nullptr, std::nullopt);
    for (const auto& st : r.steps) {
        state_rows(std::to_string(st.index), st.operation, st.state, &st.predicted_p, st.predicted_mean);
    }
}

/// Table: quantity,n,estimate,stderr,target,z.
inline void write_csv(std::ostream& out, const CampaignResult& r) {
    out << "quantity,n,estimate,stderr,target,z\n";
    auto row = [&](const char* quantity, std::optional<std::size_t> n, const BinComparison& b) {
        out << quantity << ',' << (n ? std::to_string(*n) : "") << ',' << fmt12(b.estimate) << ','
            << fmt12(b.stderr_estimate) << ',' << fmt12(b.target) << ',' << fmt12(b.z) << '\n';
    };
    const PosteriorEstimate& e = r.estimate;
    out << "records,," << e.records << ",,,\n";
    out << "detections,," << e.detections << ",,,\n";
    out << "anomalies,," << e.anomalies << ",,,\n";
    row("conditioning_fraction", std::nullopt, r.fraction);
    row("conditioned_mean", std::nullopt, r.mean);
    for (std::size_t n = 0; n < r.posterior.size(); ++n) row("posterior", n, r.posterior[n]);
    if (r.window_mean) row("window_mean", std::nullopt, *r.window_mean);
    for (std::size_t n = 0; n < r.window_posterior.size(); ++n) row("window_posterior", n, r.window_posterior[n]);
    if (std::isfinite(e.mean_count_time)) {
        out << "mean_count_time,," << fmt12(e.mean_count_time) << ',' << fmt12(e.count_time_stderr) << ",,\n";
    }
}

template <class Result>
void write_result(std::ostream& out, const Result& r, OutputFormat format) {
    if (format == OutputFormat::Csv) {
        write_csv(out, r);
    } else {
        out << to_json(r).dump(2) << '\n';
    }
}

}  // namespace fockdet
