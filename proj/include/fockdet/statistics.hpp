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

// Photon-number moments, post-detection mean predictions and standard state
// generators.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"

namespace fockdet {

struct MomentSummary {
    double mean = 0.0;
    double variance = 0.0;
    double vacuum_prob = 1.0;
};

inline MomentSummary moments(const PhotonDistribution& p) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        const double x = double(n);
        m1 += x * p[n];
        m2 += x * x * p[n];
    }
    return {m1, m2 - m1 * m1, p[0]};
}

/// Mean photon number after one excited atom in the discrete model:
/// <n> / (1 - p(0)) - 1.
inline double predict_discrete_mean(const MomentSummary& s) {
    if (s.vacuum_prob >= 1.0 - kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "no photon can be subtracted from the vacuum");
    }
    return s.mean / (1.0 - s.vacuum_prob) - 1.0;
}

/// Mean photon number right after one count in the continuous model:
/// <n> - 1 + var(n) / <n>. Sub-Poissonian fields lose more than one photon on
/// average, super-Poissonian ones less.
inline double predict_continuous_mean(const MomentSummary& s) {
    if (s.mean <= kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "no count is possible from the vacuum");
    }
    return s.mean - 1.0 + s.variance / s.mean;
}

namespace family {
struct Fock {
    int n = 0;
};
struct Thermal {
    double mean = 0.0;
};
/// Poissonian photon statistics of a coherent state, without its coherences.
struct PoissonDiagonal {
    double mean = 0.0;
};
struct Custom {
    std::vector<double> p;
};
}  // namespace family

using StateFamily = std::variant<family::Fock, family::Thermal, family::PoissonDiagonal, family::Custom>;

/// A generated distribution together with the probability mass the untruncated
/// family places on levels n >= d (removed by renormalization).
struct GeneratedState {
    PhotonDistribution distribution;
    double tail_mass = 0.0;
};

namespace detail {

inline void require_mean(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw Error(ErrorKind::OutOfRange, "mean photon number must be finite and >= 0");
    }
}

inline GeneratedState make_fock(int n, FockDimension dim) {
    if (n < 0 || n >= dim.value()) {
        throw Error(ErrorKind::OutOfRange, "Fock level " + std::to_string(n) +
                                               " outside 0.." + std::to_string(dim.value() - 1));
    }
    std::vector<double> p(dim.size(), 0.0);
    p[std::size_t(n)] = 1.0;
    return {PhotonDistribution::from_probabilities(std::move(p)), 0.0};
}

// p(n) = m^n / (1+m)^(n+1); tail sum_{n>=d} p(n) = (m/(1+m))^d.
inline GeneratedState make_thermal(double mean, FockDimension dim) {
    require_mean(mean);
    if (mean == 0.0) return make_fock(0, dim);
    const double ratio = mean / (1.0 + mean);
    std::vector<double> p(dim.size());
    double term = 1.0 / (1.0 + mean);
    for (double& x : p) {
        x = term;
        term *= ratio;
    }
    const double tail = std::pow(ratio, double(dim.value()));
    return {PhotonDistribution::from_weights(std::move(p)), tail};
}

// p(n) = e^-m m^n / n!, built in log space to survive large means.
inline GeneratedState make_poisson(double mean, FockDimension dim) {
    require_mean(mean);
    if (mean == 0.0) return make_fock(0, dim);
    auto log_term = [mean](int n) { return -mean + n * std::log(mean) - std::lgamma(n + 1.0); };
    std::vector<double> p(dim.size());
    for (int n = 0; n < dim.value(); ++n) p[std::size_t(n)] = std::exp(log_term(n));
    // Tail: sum the series past the edge until the terms stop mattering.
    double tail = 0.0;
    for (int n = dim.value();; ++n) {
        const double t = std::exp(log_term(n));
        tail += t;
        if (n > mean && t <= tail * 1e-17) break;
        if (n > dim.value() + 100000) break;
    }
    return {PhotonDistribution::from_weights(std::move(p)), tail};
}

inline GeneratedState make_custom(std::vector<double> p, FockDimension dim) {
    if (p.size() > dim.size()) {
        throw Error(ErrorKind::OutOfRange, "custom distribution has " + std::to_string(p.size()) +
                                               " entries, more than the Fock dimension");
    }
    p.resize(dim.size(), 0.0);
    return {PhotonDistribution::from_probabilities(std::move(p)), 0.0};
}

}  // namespace detail

/// Builds a normalized distribution of the requested family truncated to `dim`.
inline GeneratedState make_state(const StateFamily& family, FockDimension dim) {
    struct Visitor {
        FockDimension dim;
        GeneratedState operator()(const family::Fock& f) const { return detail::make_fock(f.n, dim); }
        GeneratedState operator()(const family::Thermal& f) const {
            return detail::make_thermal(f.mean, dim);
        }
        GeneratedState operator()(const family::PoissonDiagonal& f) const {
            return detail::make_poisson(f.mean, dim);
        }
        GeneratedState operator()(const family::Custom& f) const {
            return detail::make_custom(f.p, dim);
        }
    };
    return std::visit(Visitor{dim}, family);
}

}  // namespace fockdet
