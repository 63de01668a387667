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

// Brute-force Bayes updates of the photon-number distribution.
//
// The prior over "n photons in the cavity" is reweighted by the likelihood of
// the observed detection event and renormalized; the reduction of the field
// by one photon is then applied as a plain index shift. This path shares no
// code with the superoperator matrices and serves as their oracle.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"

namespace fockdet {

/// P(detection | n photons) for n = 0..d-1, each entry in [0, 1].
class ConditionalModel {
public:
    static ConditionalModel from_likelihood(std::vector<double> likelihood) {
        FockDimension dim(static_cast<int>(likelihood.size()));
        for (std::size_t n = 0; n < likelihood.size(); ++n) {
            const double l = likelihood[n];
            if (!(l >= 0.0 && l <= 1.0)) {
                throw Error(ErrorKind::InvalidArgument,
                            "likelihood at n=" + std::to_string(n) + " must lie in [0, 1]");
            }
        }
        return ConditionalModel(dim, std::move(likelihood));
    }

    /// Atom-stream detection, waiting until an excited atom is seen: certain
    /// for any n >= 1 and impossible from the vacuum.
    static ConditionalModel discrete(FockDimension dim) {
        std::vector<double> l(dim.size(), 1.0);
        l[0] = 0.0;
        return from_likelihood(std::move(l));
    }

    /// Continuous detection in an interval dt: probability n*lambda*dt. The
    /// interval is fixed at lambda*dt = 1/(d-1), which keeps every entry a
    /// probability; the constant cancels in the posterior.
    static ConditionalModel continuous(FockDimension dim) {
        std::vector<double> l(dim.size());
        const double scale = 1.0 / double(dim.value() - 1);
        for (std::size_t n = 0; n < l.size(); ++n) l[n] = double(n) * scale;
        return from_likelihood(std::move(l));
    }

    FockDimension dim() const noexcept { return dim_; }
    double operator[](std::size_t n) const { return likelihood_[n]; }
    const std::vector<double>& values() const noexcept { return likelihood_; }

private:
    ConditionalModel(FockDimension dim, std::vector<double> l)
        : dim_(dim), likelihood_(std::move(l)) {}

    FockDimension dim_;
    std::vector<double> likelihood_;
};

/// P(n | detection) = p(n) L(n) / sum_m p(m) L(m). Throws ZeroEvidence when
/// the evidence is <= 1e-12.
inline PhotonDistribution posterior(const PhotonDistribution& prior, const ConditionalModel& model) {
    detail::require_same_dim(prior.dim(), model.dim(), "posterior");
    std::vector<double> joint(prior.size());
    double evidence = 0.0;
    for (std::size_t n = 0; n < joint.size(); ++n) {
        joint[n] = prior[n] * model[n];
        evidence += joint[n];
    }
    if (evidence <= kVacuumThreshold) {
        throw Error(ErrorKind::ZeroEvidence, "detection has probability " + std::to_string(evidence));
    }
    for (double& x : joint) x /= evidence;
    return PhotonDistribution::from_probabilities(std::move(joint));
}

/// Moves every photon-number hypothesis down by one: out(n) = in(n+1).
/// Requires in(0) = 0, which holds for any posterior given a detection.
inline PhotonDistribution downshift(const PhotonDistribution& p) {
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t n = 0; n + 1 < p.size(); ++n) out[n] = p[n + 1];
    return PhotonDistribution::from_probabilities(std::move(out));
}

/// Field distribution after one excited atom: p(n+1) / (1 - p(0)).
inline PhotonDistribution discrete_posterior(const PhotonDistribution& prior) {
    return downshift(posterior(prior, ConditionalModel::discrete(prior.dim())));
}

/// Field distribution immediately after one count: (n+1) p(n+1) / <n>.
inline PhotonDistribution continuous_posterior(const PhotonDistribution& prior) {
    double mean_n = 0.0;
    for (std::size_t n = 0; n < prior.size(); ++n) mean_n += double(n) * prior[n];
    if (mean_n <= kVacuumThreshold) {
        throw Error(ErrorKind::ZeroEvidence, "no count is possible from the vacuum");
    }
    const ConditionalModel model = ConditionalModel::continuous(prior.dim());
    std::vector<double> joint(prior.size());
    double evidence = 0.0;
    for (std::size_t n = 0; n < joint.size(); ++n) {
        joint[n] = prior[n] * model[n];
        evidence += joint[n];
    }
    for (double& x : joint) x /= evidence;
    return downshift(PhotonDistribution::from_probabilities(std::move(joint)));
}

}  // namespace fockdet
