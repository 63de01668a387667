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

// Scenario files: a JSON document describing the initial state, the detection
// model and either a superoperator pipeline or a Monte Carlo campaign.
//
//   {
//     "model": "discrete",                       // or "continuous"
//     "dim": 128,
//     "initial_state": {"family": "thermal", "mean": 2.0},
//     "operations": [{"op": "subtract", "n": 1}],
//     "coupling": {"lambda": 1.0},               // continuous only
//     "trials": 1000000,
//     "seed": 42,
//     "campaign": {"excitation": {"kind": "constant", "value": 0.5},
//                  "max_atoms": 10000},
//     "output": {"path": "result.json", "format": "json"}
//   }
//
// Unknown keys are rejected. Errors carry the path of the offending field.
// The full schema is documented in README.md.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"
#include "fockdet/statistics.hpp"
#include "fockdet/superops.hpp"
#include "fockdet/trajectory.hpp"

namespace fockdet {

using Json = nlohmann::ordered_json;

enum class OutputFormat { Csv, Json };

enum class OperationKind { Subtract, Add, OneCount, NoCount, Phase, Imperfect };

struct OperationSpec {
    OperationKind kind = OperationKind::Subtract;
    int n = 1;           // Subtract, Add
    double tau = 0.0;    // NoCount
    double phi = 0.0;    // Phase
    DetectorEfficiency efficiency;  // Imperfect
};

enum class ExcitationKind { Constant, Saturating, Table };

struct ExcitationSpec {
    ExcitationKind kind = ExcitationKind::Constant;
    double value = 0.5;        // Constant
    double offset = 3.0;       // Saturating: q(n) = n / (n + offset)
    std::vector<double> table;  // Table

    ExcitationProfile build(FockDimension dim) const {
        switch (kind) {
            case ExcitationKind::Constant: return ExcitationProfile::constant(value, dim);
            case ExcitationKind::Saturating: return ExcitationProfile::saturating(offset, dim);
            case ExcitationKind::Table: {
                std::vector<double> q = table;
                q.resize(dim.size(), q.empty() ? 0.0 : q.back());
                return ExcitationProfile::from_table(std::move(q));
            }
        }
        throw Error(ErrorKind::InvalidArgument, "unknown excitation kind");
    }
};

struct CampaignSpec {
    std::optional<ExcitationSpec> excitation;  // discrete
    std::uint64_t max_atoms = 10000;           // discrete
    std::optional<double> t_max;               // continuous; +inf allowed
};

struct OutputSpec {
    std::optional<std::string> path;
    OutputFormat format = OutputFormat::Json;
};

struct Scenario {
    DetectionModel model = DetectionModel::Discrete;
    int dim = 2;
    StateFamily initial_state = family::Fock{0};
    std::vector<OperationSpec> operations;
    std::optional<CouplingParams> coupling;  // lambda only; tau lives on no_count steps
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::optional<CampaignSpec> campaign;
    OutputSpec output;
};

/// Largest generator tail mass a scenario may discard through truncation.
inline constexpr double kScenarioTailLimit = 1e-10;

namespace detail {

[[noreturn]] inline void invalid(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Validation, path + ": " + msg);
}

inline void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) invalid(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) invalid(path + "." + key, "unknown key");
    }
}

inline const Json& require(const Json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) invalid(path + "." + key, "missing required key");
    return obj.at(key);
}

inline double as_number(const Json& v, const std::string& path) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        invalid(path, "expected a number");
    }
    if (!v.is_number()) invalid(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) invalid(path, "expected a finite number");
    return x;
}

inline double as_finite(const Json& v, const std::string& path) {
    const double x = as_number(v, path);
    if (!std::isfinite(x)) invalid(path, "expected a finite number");
    return x;
}

inline std::int64_t as_integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) invalid(path, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t as_unsigned(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        invalid(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

inline std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) invalid(path, "expected a string");
    return v.get<std::string>();
}

inline std::vector<double> as_vector(const Json& v, const std::string& path) {
    if (!v.is_array()) invalid(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_finite(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline StateFamily parse_state(const Json& j, const std::string& path) {
    if (!j.is_object()) invalid(path, "expected an object");
    const std::string fam = as_string(require(j, path, "family"), path + ".family");
    if (fam == "fock") {
        check_keys(j, path, {"family", "n"});
        const auto n = as_integer(require(j, path, "n"), path + ".n");
        return family::Fock{int(n)};
    }
    if (fam == "thermal") {
        check_keys(j, path, {"family", "mean"});
        return family::Thermal{as_finite(require(j, path, "mean"), path + ".mean")};
    }
    if (fam == "poisson") {
        check_keys(j, path, {"family", "mean"});
        return family::PoissonDiagonal{as_finite(require(j, path, "mean"), path + ".mean")};
    }
    if (fam == "custom") {
        check_keys(j, path, {"family", "p"});
        return family::Custom{as_vector(require(j, path, "p"), path + ".p")};
    }
    invalid(path + ".family", "unknown state family '" + fam + "' (fock, thermal, poisson, custom)");
}

inline Json state_to_json(const StateFamily& s) {
    struct Visitor {
        Json operator()(const family::Fock& f) const { return {{"family", "fock"}, {"n", f.n}}; }
        Json operator()(const family::Thermal& f) const { return {{"family", "thermal"}, {"mean", f.mean}}; }
        Json operator()(const family::PoissonDiagonal& f) const {
            return {{"family", "poisson"}, {"mean", f.mean}};
        }
        Json operator()(const family::Custom& f) const { return {{"family", "custom"}, {"p", f.p}}; }
    };
    return std::visit(Visitor{}, s);
}

inline int as_events(const Json& v, const std::string& path) {
    const auto n = as_integer(v, path);
    if (n < 1 || n > 1'000'000) invalid(path, "must be a positive integer");
    return int(n);
}

inline OperationSpec parse_operation(const Json& j, const std::string& path) {
    if (!j.is_object()) invalid(path, "expected an object");
    const std::string op = as_string(require(j, path, "op"), path + ".op");
    OperationSpec spec;
    if (op == "subtract" || op == "add") {
        check_keys(j, path, {"op", "n"});
        spec.kind = op == "subtract" ? OperationKind::Subtract : OperationKind::Add;
        spec.n = j.contains("n") ? as_events(j.at("n"), path + ".n") : 1;
    } else if (op == "one_count") {
        check_keys(j, path, {"op"});
        spec.kind = OperationKind::OneCount;
    } else if (op == "no_count") {
        check_keys(j, path, {"op", "tau"});
        spec.kind = OperationKind::NoCount;
        spec.tau = as_finite(require(j, path, "tau"), path + ".tau");
        if (spec.tau < 0.0) invalid(path + ".tau", "must be >= 0");
    } else if (op == "phase") {
        check_keys(j, path, {"op", "phi"});
        spec.kind = OperationKind::Phase;
        spec.phi = as_finite(require(j, path, "phi"), path + ".phi");
    } else if (op == "imperfect") {
        check_keys(j, path, {"op", "direction", "alpha"});
        spec.kind = OperationKind::Imperfect;
        const std::string dir = as_string(require(j, path, "direction"), path + ".direction");
        if (dir == "subtract") spec.efficiency.direction = ShiftDirection::Subtract;
        else if (dir == "add") spec.efficiency.direction = ShiftDirection::Add;
        else invalid(path + ".direction", "expected 'subtract' or 'add'");
        const Json& alpha = require(j, path, "alpha");
        if (!alpha.is_object() || alpha.empty()) invalid(path + ".alpha", "expected an object {\"N\": weight}");
        for (const auto& [key, w] : alpha.items()) {
            const std::string wpath = path + ".alpha." + key;
            std::size_t used = 0;
            int n = -1;
            try {
                n = std::stoi(key, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != key.size() || n < 0) invalid(wpath, "keys must be nonnegative integers");
            spec.efficiency.alpha[n] = as_finite(w, wpath);
        }
        try {
            spec.efficiency.validate();
        } catch (const Error& e) {
            invalid(path + ".alpha", e.what());
        }
    } else {
        invalid(path + ".op", "unknown operation '" + op + "'");
    }
    return spec;
}

inline Json operation_to_json(const OperationSpec& op) {
    switch (op.kind) {
        case OperationKind::Subtract: return {{"op", "subtract"}, {"n", op.n}};
        case OperationKind::Add: return {{"op", "add"}, {"n", op.n}};
        case OperationKind::OneCount: return {{"op", "one_count"}};
        case OperationKind::NoCount: return {{"op", "no_count"}, {"tau", op.tau}};
        case OperationKind::Phase: return {{"op", "phase"}, {"phi", op.phi}};
        case OperationKind::Imperfect: {
            Json alpha = Json::object();
            for (const auto& [n, w] : op.efficiency.alpha) alpha[std::to_string(n)] = w;
            return {{"op", "imperfect"},
                    {"direction", op.efficiency.direction == ShiftDirection::Subtract ? "subtract" : "add"},
                    {"alpha", alpha}};
        }
    }
    return {};
}

inline ExcitationSpec parse_excitation(const Json& j, const std::string& path) {
    if (!j.is_object()) invalid(path, "expected an object");
    const std::string kind = as_string(require(j, path, "kind"), path + ".kind");
    ExcitationSpec spec;
    if (kind == "constant") {
        check_keys(j, path, {"kind", "value"});
        spec.kind = ExcitationKind::Constant;
        spec.value = as_finite(require(j, path, "value"), path + ".value");
        if (!(spec.value > 0.0 && spec.value <= 1.0)) invalid(path + ".value", "must lie in (0, 1]");
    } else if (kind == "saturating") {
        check_keys(j, path, {"kind", "offset"});
        spec.kind = ExcitationKind::Saturating;
        spec.offset = as_finite(require(j, path, "offset"), path + ".offset");
        if (!(spec.offset > 0.0)) invalid(path + ".offset", "must be positive");
    } else if (kind == "table") {
        check_keys(j, path, {"kind", "q"});
        spec.kind = ExcitationKind::Table;
        spec.table = as_vector(require(j, path, "q"), path + ".q");
        if (spec.table.empty()) invalid(path + ".q", "must not be empty");
    } else {
        invalid(path + ".kind", "unknown excitation kind '" + kind + "' (constant, saturating, table)");
    }
    return spec;
}

inline Json excitation_to_json(const ExcitationSpec& e) {
    switch (e.kind) {
        case ExcitationKind::Constant: return {{"kind", "constant"}, {"value", e.value}};
        case ExcitationKind::Saturating: return {{"kind", "saturating"}, {"offset", e.offset}};
        case ExcitationKind::Table: return {{"kind", "table"}, {"q", e.table}};
    }
    return {};
}

inline bool operation_allowed(DetectionModel model, OperationKind kind) {
    switch (kind) {
        case OperationKind::Phase: return true;
        case OperationKind::OneCount:
        case OperationKind::NoCount: return model == DetectionModel::Continuous;
        case OperationKind::Subtract:
        case OperationKind::Add:
        case OperationKind::Imperfect: return model == DetectionModel::Discrete;
    }
    return false;
}

}  // namespace detail

inline std::string_view to_string(OutputFormat f) noexcept { return f == OutputFormat::Csv ? "csv" : "json"; }

inline OutputFormat parse_format(const std::string& s, const std::string& path = "output.format") {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    detail::invalid(path, "expected 'csv' or 'json'");
}

/// Cross-field checks: operations fit the model, the initial state is
/// representable at `dim` with tail mass below 1e-10, campaign settings are
/// consistent.
inline void validate(const Scenario& s) {
    try {
        FockDimension{s.dim};
    } catch (const Error& e) {
        detail::invalid("dim", e.what());
    }
    GeneratedState init = [&] {
        try {
            return make_state(s.initial_state, FockDimension(s.dim));
        } catch (const Error& e) {
            detail::invalid("initial_state", e.what());
        }
    }();
    if (init.tail_mass >= kScenarioTailLimit) {
        std::ostringstream msg;
        msg << "truncation discards tail mass " << init.tail_mass << "; increase dim";
        detail::invalid("dim", msg.str());
    }
    for (std::size_t i = 0; i < s.operations.size(); ++i) {
        if (!detail::operation_allowed(s.model, s.operations[i].kind)) {
            detail::invalid("operations[" + std::to_string(i) + "].op",
                            "not available in the " + std::string(to_string(s.model)) + " model");
        }
    }
    if (s.model == DetectionModel::Continuous) {
        if (!s.coupling) detail::invalid("coupling", "required for the continuous model");
        if (!(s.coupling->lambda > 0.0) || !std::isfinite(s.coupling->lambda)) {
            detail::invalid("coupling.lambda", "must be positive and finite");
        }
    } else if (s.coupling) {
        detail::invalid("coupling", "only used by the continuous model");
    }
    if (s.campaign) {
        if (s.model == DetectionModel::Discrete) {
            if (s.campaign->t_max) detail::invalid("campaign.t_max", "only used by the continuous model");
            if (s.campaign->max_atoms < 1) detail::invalid("campaign.max_atoms", "must be at least 1");
            if (s.campaign->excitation) {
                try {
                    AtomStreamConfig cfg{s.campaign->excitation->build(FockDimension(s.dim)),
                                         s.campaign->max_atoms, s.seed};
                    cfg.validate_for(init.distribution);
                } catch (const Error& e) {
                    detail::invalid("campaign.excitation", e.what());
                }
            }
        } else {
            if (s.campaign->excitation) detail::invalid("campaign.excitation", "only used by the discrete model");
            if (s.campaign->t_max && !(*s.campaign->t_max > 0.0)) {
                detail::invalid("campaign.t_max", "must be positive");
            }
        }
    }
}

inline Scenario parse_scenario(const Json& j) {
    using namespace detail;
    check_keys(j, "$", {"model", "dim", "initial_state", "operations", "coupling", "trials", "seed",
                        "campaign", "output"});
    Scenario s;
    const std::string model = as_string(require(j, "$", "model"), "model");
    if (model == "discrete") s.model = DetectionModel::Discrete;
    else if (model == "continuous") s.model = DetectionModel::Continuous;
    else invalid("model", "expected 'discrete' or 'continuous'");

    const auto dim = as_integer(require(j, "$", "dim"), "dim");
    if (dim < 2 || dim > 4096) invalid("dim", "must lie in 2..4096");
    s.dim = int(dim);
    s.initial_state = parse_state(require(j, "$", "initial_state"), "initial_state");

    if (j.contains("operations")) {
        const Json& ops = j.at("operations");
        if (!ops.is_array()) invalid("operations", "expected an array");
        for (std::size_t i = 0; i < ops.size(); ++i) {
            s.operations.push_back(parse_operation(ops[i], "operations[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("coupling")) {
        const Json& c = j.at("coupling");
        check_keys(c, "coupling", {"lambda"});
        s.coupling = CouplingParams{as_finite(require(c, "coupling", "lambda"), "coupling.lambda"), 0.0};
    }
    if (j.contains("trials")) s.trials = as_unsigned(j.at("trials"), "trials");
    if (j.contains("seed")) s.seed = as_unsigned(j.at("seed"), "seed");
    if (j.contains("campaign")) {
        const Json& c = j.at("campaign");
        check_keys(c, "campaign", {"excitation", "max_atoms", "t_max"});
        CampaignSpec camp;
        if (c.contains("excitation")) camp.excitation = parse_excitation(c.at("excitation"), "campaign.excitation");
        if (c.contains("max_atoms")) camp.max_atoms = as_unsigned(c.at("max_atoms"), "campaign.max_atoms");
        if (c.contains("t_max")) camp.t_max = as_number(c.at("t_max"), "campaign.t_max");
        s.campaign = camp;
    }
    if (j.contains("output")) {
        const Json& o = j.at("output");
        check_keys(o, "output", {"path", "format"});
        if (o.contains("path")) s.output.path = as_string(o.at("path"), "output.path");
        if (o.contains("format")) s.output.format = parse_format(as_string(o.at("format"), "output.format"));
    }
    validate(s);
    return s;
}

/// Parses scenario text; JSON syntax errors become ValidationError.
inline Scenario parse_scenario(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::Validation, std::string("$: malformed JSON: ") + e.what());
    }
    return parse_scenario(j);
}

inline Scenario parse_scenario(const char* text) { return parse_scenario(std::string(text)); }

/// Canonical form with every field spelled out.
inline Json to_json(const Scenario& s) {
    Json j;
    j["model"] = std::string(to_string(s.model));
    j["dim"] = s.dim;
    j["initial_state"] = detail::state_to_json(s.initial_state);
    j["operations"] = Json::array();
    for (const auto& op : s.operations) j["operations"].push_back(detail::operation_to_json(op));
    if (s.coupling) j["coupling"] = {{"lambda", s.coupling->lambda}};
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    if (s.campaign) {
        Json c = Json::object();
        if (s.campaign->excitation) c["excitation"] = detail::excitation_to_json(*s.campaign->excitation);
        c["max_atoms"] = s.campaign->max_atoms;
        if (s.campaign->t_max) {
            if (std::isinf(*s.campaign->t_max)) c["t_max"] = "inf";
            else c["t_max"] = *s.campaign->t_max;
        }
        j["campaign"] = c;
    }
    Json o = Json::object();
    if (s.output.path) o["path"] = *s.output.path;
    o["format"] = std::string(to_string(s.output.format));
    j["output"] = o;
    return j;
}

inline std::string serialize(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

}  // namespace fockdet
