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

// State-reduction superoperators for the two photodetection models.
//
// Continuous (closed-system) detection reduces the field through the
// annihilation operator:
//   one count       J rho   = a rho a+ / Tr(rho a+ a)
//   no count for t  S_t rho = K rho K / Tr(K rho K),  K = exp(-lambda t n / 2)
//
// Discrete (atom-stream) detection reduces diagonal fields through the bare
// Susskind-Glogower shifts:
//   N subtracted    B-^N rho = E-^N rho E+^N / Tr(rho E+^N E-^N)
//   N added         B+^N rho = E+^N rho E-^N                 (no normalization)
//
// Matrix forms act on DensityMatrix. The `closed_form` namespace holds the
// equivalent photon-distribution updates, used for predictions and as a
// second route in tests.

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "fockdet/error.hpp"
#include "fockdet/fock_core.hpp"

namespace fockdet {

/// Detector-field coupling rate `lambda` (1/time) and no-count duration `tau`.
struct CouplingParams {
    double lambda = 1.0;
    double tau = 0.0;

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw Error(ErrorKind::InvalidArgument, "coupling lambda must be positive and finite");
        }
        if (!(tau >= 0.0) || !std::isfinite(tau)) {
            throw Error(ErrorKind::InvalidArgument, "no-count duration tau must be >= 0 and finite");
        }
    }
};

enum class ShiftDirection { Subtract, Add };

/// Weights alpha_N over the number of photons actually shifted by an imperfect
/// detector record. N = 0 is allowed and leaves the state unchanged.
struct DetectorEfficiency {
    std::map<int, double> alpha;
    ShiftDirection direction = ShiftDirection::Subtract;

    void validate() const {
        if (alpha.empty()) throw Error(ErrorKind::InvalidWeights, "efficiency weights are empty");
        double total = 0.0;
        for (const auto& [n, w] : alpha) {
            if (n < 0) {
                throw Error(ErrorKind::InvalidWeights, "negative shift N=" + std::to_string(n));
            }
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw Error(ErrorKind::InvalidWeights,
                            "weight for N=" + std::to_string(n) + " must be >= 0");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance) {
            throw Error(ErrorKind::InvalidWeights,
                        "weights sum to " + std::to_string(total) + ", expected 1");
        }
    }

    /// The most probable shift (smallest N on ties).
    int nominal() const {
        int best = 0;
        double best_w = -1.0;
        for (const auto& [n, w] : alpha) {
            if (w > best_w) {
                best = n;
                best_w = w;
            }
        }
        return best;
    }
};

namespace detail {

inline void require_diagonal(const DensityMatrix& rho) {
    const double worst = max_off_diagonal(rho);
    if (worst > kProbabilityTolerance) throw NotDiagonalError(worst, kProbabilityTolerance);
}

inline void require_positive_events(int n_events) {
    if (n_events < 1) {
        throw Error(ErrorKind::InvalidArgument,
                    "number of events must be positive, got " + std::to_string(n_events));
    }
}

// Population of levels n > d-1-N, i.e. the mass pushed past the truncation
// edge by an N-photon upward shift.
inline double edge_mass(const DensityMatrix& rho, int n_events) {
    const int d = rho.dim().value();
    double mass = 0.0;
    for (int n = std::max(0, d - n_events); n < d; ++n) mass += rho.population(std::size_t(n));
    return mass;
}

}  // namespace detail

/// One-count reduction of the continuous model. Throws VacuumState when
/// <n> <= 1e-12.
inline DensityMatrix one_count(const DensityMatrix& rho) {
    const FockOperator a = make_operator(OperatorKind::Annihilate, rho.dim());
    const double mean_n = (rho.matrix() * a.matrix().adjoint() * a.matrix()).trace().real();
    if (mean_n <= kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "one-count reduction of a state with <n> = " +
                                                std::to_string(mean_n));
    }
    Matrix out = a.matrix() * rho.matrix() * a.matrix().adjoint();
    out /= mean_n;
    return DensityMatrix::from_matrix(std::move(out));
}

/// No-count reduction over `params.tau`. The normalization is the trace of
/// the conjugated numerator, so the result has unit trace exactly. Fock
/// states and the vacuum are fixed points.
inline DensityMatrix no_count(const DensityMatrix& rho, const CouplingParams& params) {
    params.validate();
    const Eigen::Index d = rho.dim().value();
    // Shift the exponent by the lowest occupied level so that large lambda*tau
    // does not underflow the whole state; the factor cancels on normalization.
    Eigen::Index lowest = 0;
    while (lowest + 1 < d && rho.population(std::size_t(lowest)) <= 0.0) ++lowest;
    const double rate = 0.5 * params.lambda * params.tau;
    Eigen::VectorXcd k(d);
    for (Eigen::Index n = 0; n < d; ++n) k(n) = n < lowest ? 0.0 : std::exp(-rate * double(n - lowest));
    Matrix out = k.asDiagonal() * rho.matrix() * k.asDiagonal();
    const double norm = out.trace().real();
    out /= norm;
    return DensityMatrix::from_matrix(std::move(out));
}

/// Normalization Tr(rho E+^N E-^N) of an N-photon subtraction: the
/// population at or above level N. It equals 1 exactly when p(n) = 0 for
/// n < N, in which case the subtraction acts as a pure number shift.
inline double subtraction_norm(const DensityMatrix& rho, int n_events) {
    detail::require_positive_events(n_events);
    const FockOperator lower_n = power(make_operator(OperatorKind::LowerSG, rho.dim()), n_events);
    const Matrix projector = lower_n.matrix().adjoint() * lower_n.matrix();
    return (rho.matrix() * projector).trace().real();
}

/// Unnormalized E-^N rho E+^N.
inline Matrix lower_conjugate(const DensityMatrix& rho, int n_events) {
    const FockOperator lower_n = power(make_operator(OperatorKind::LowerSG, rho.dim()), n_events);
    return lower_n.matrix() * rho.matrix() * lower_n.matrix().adjoint();
}

/// Unnormalized E+^N rho E-^N. Population within N levels of the truncation
/// edge is lost; add_photons guards against that.
inline Matrix raise_conjugate(const DensityMatrix& rho, int n_events) {
    const FockOperator raise_n = power(make_operator(OperatorKind::RaiseSG, rho.dim()), n_events);
    return raise_n.matrix() * rho.matrix() * raise_n.matrix().adjoint();
}

/// Discrete-model reduction after one excited atom: E- rho E+ / (1 - <0|rho|0>).
/// Requires a diagonal state with vacuum population below 1 - 1e-12.
inline DensityMatrix subtract_one(const DensityMatrix& rho) {
    detail::require_diagonal(rho);
    const double norm = 1.0 - rho.population(0);
    if (norm <= kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "no photon can be subtracted from the vacuum");
    }
    Matrix out = lower_conjugate(rho, 1);
    out /= norm;
    return DensityMatrix::from_matrix(std::move(out));
}

/// Discrete-model reduction after N excited atoms.
inline DensityMatrix subtract_photons(const DensityMatrix& rho, int n_events) {
    detail::require_positive_events(n_events);
    detail::require_diagonal(rho);
    const double norm = subtraction_norm(rho, n_events);
    if (norm <= kVacuumThreshold) {
        throw ShiftError(ErrorKind::InsufficientPhotons, n_events,
                         "population at or above level N is " + std::to_string(norm));
    }
    Matrix out = lower_conjugate(rho, n_events);
    out /= norm;
    return DensityMatrix::from_matrix(std::move(out));
}

/// Discrete-model addition of N photons. No normalization is applied; the
/// output is validated as a unit-trace state. Throws TruncationOverflow if
/// more than 1e-10 of the population sits within N levels of the edge.
inline DensityMatrix add_photons(const DensityMatrix& rho, int n_events) {
    detail::require_positive_events(n_events);
    detail::require_diagonal(rho);
    const double lost = detail::edge_mass(rho, n_events);
    if (lost > kProbabilityTolerance) {
        throw ShiftError(ErrorKind::TruncationOverflow, n_events,
                         "population " + std::to_string(lost) +
                             " would shift past the top level; enlarge the Fock dimension");
    }
    return DensityMatrix::from_matrix(raise_conjugate(rho, n_events));
}

/// exp(i phi n) rho exp(-i phi n).
inline DensityMatrix phase_shift(const DensityMatrix& rho, double phi) {
    const Eigen::Index d = rho.dim().value();
    Eigen::VectorXcd u(d);
    for (Eigen::Index n = 0; n < d; ++n) u(n) = std::polar(1.0, phi * double(n));
    Matrix out = u.asDiagonal() * rho.matrix() * u.conjugate().asDiagonal();
    return DensityMatrix::from_matrix(std::move(out));
}

/// Mixture sum_N alpha_N B^N rho over the detector's shift distribution.
/// Each term is individually trace-one, so the mixture is not renormalized.
inline DensityMatrix imperfect_detection(const DensityMatrix& rho, const DetectorEfficiency& eff) {
    eff.validate();
    detail::require_diagonal(rho);
    const Eigen::Index d = rho.dim().value();
    Matrix out = Matrix::Zero(d, d);
    for (const auto& [n, w] : eff.alpha) {
        if (w == 0.0) continue;
        if (n == 0) {
            out += w * rho.matrix();
        } else if (eff.direction == ShiftDirection::Subtract) {
            out += w * subtract_photons(rho, n).matrix();
        } else {
            out += w * add_photons(rho, n).matrix();
        }
    }
    return DensityMatrix::from_matrix(std::move(out));
}

namespace closed_form {

/// p(n) -> (n+1) p(n+1) / <n>
inline PhotonDistribution one_count(const PhotonDistribution& p) {
    const std::size_t d = p.size();
    double mean_n = 0.0;
    for (std::size_t n = 0; n < d; ++n) mean_n += double(n) * p[n];
    if (mean_n <= kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "one-count reduction of a state with <n> = 0");
    }
    std::vector<double> out(d, 0.0);
    for (std::size_t n = 0; n + 1 < d; ++n) out[n] = double(n + 1) * p[n + 1] / mean_n;
    return PhotonDistribution::from_probabilities(std::move(out));
}

/// p(n) -> p(n) exp(-n lambda tau), renormalized.
inline PhotonDistribution no_count(const PhotonDistribution& p, const CouplingParams& params) {
    params.validate();
    std::size_t lowest = 0;
    while (lowest + 1 < p.size() && p[lowest] <= 0.0) ++lowest;
    std::vector<double> w(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (n >= lowest) w[n] = p[n] * std::exp(-params.lambda * params.tau * (double(n) - double(lowest)));
    }
    return PhotonDistribution::from_weights(std::move(w));
}

/// p(n) -> p(n+1) / (1 - p(0))
inline PhotonDistribution subtract_one(const PhotonDistribution& p) {
    const double norm = 1.0 - p[0];
    if (norm <= kVacuumThreshold) {
        throw Error(ErrorKind::VacuumState, "no photon can be subtracted from the vacuum");
    }
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t n = 0; n + 1 < p.size(); ++n) out[n] = p[n + 1] / norm;
    return PhotonDistribution::from_probabilities(std::move(out));
}

/// p(n) -> p(n+N) / sum_{m>=N} p(m)
inline PhotonDistribution subtract_photons(const PhotonDistribution& p, int n_events) {
    detail::require_positive_events(n_events);
    const std::size_t shift = std::size_t(n_events);
    double norm = 0.0;
    for (std::size_t n = shift; n < p.size(); ++n) norm += p[n];
    if (norm <= kVacuumThreshold) {
        throw ShiftError(ErrorKind::InsufficientPhotons, n_events,
                         "population at or above level N is " + std::to_string(norm));
    }
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t n = 0; n + shift < p.size(); ++n) out[n] = p[n + shift] / norm;
    return PhotonDistribution::from_probabilities(std::move(out));
}

/// p(n) -> p(n-N)
inline PhotonDistribution add_photons(const PhotonDistribution& p, int n_events) {
    detail::require_positive_events(n_events);
    const std::size_t shift = std::size_t(n_events);
    double lost = 0.0;
    for (std::size_t n = p.size() > shift ? p.size() - shift : 0; n < p.size(); ++n) lost += p[n];
    if (lost > kProbabilityTolerance) {
        throw ShiftError(ErrorKind::TruncationOverflow, n_events,
                         "population " + std::to_string(lost) + " would shift past the top level");
    }
    std::vector<double> out(p.size(), 0.0);
    for (std::size_t n = shift; n < p.size(); ++n) out[n] = p[n - shift];
    return PhotonDistribution::from_probabilities(std::move(out));
}

inline PhotonDistribution imperfect_detection(const PhotonDistribution& p,
                                              const DetectorEfficiency& eff) {
    eff.validate();
    std::vector<double> out(p.size(), 0.0);
    for (const auto& [n, w] : eff.alpha) {
        if (w == 0.0) continue;
        const PhotonDistribution term = n == 0 ? p
                                        : eff.direction == ShiftDirection::Subtract
                                            ? subtract_photons(p, n)
                                            : add_photons(p, n);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * term[k];
    }
    return PhotonDistribution::from_probabilities(std::move(out));
}

}  // namespace closed_form

}  // namespace fockdet
