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

// Truncated Fock-space states and operators.
//
// Everything lives in the span of |0>, ..., |d-1>. Operators are the top-left
// d x d blocks of their infinite-dimensional counterparts, so the raising
// operators annihilate |d-1>; callers that shift population upward must check
// the top level themselves (see superops.hpp).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fockdet/error.hpp"

namespace fockdet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Absolute tolerance for traces, sums of probabilities and Hermiticity.
inline constexpr double kProbabilityTolerance = 1e-10;
/// Negative probabilities above this magnitude are treated as roundoff.
inline constexpr double kRoundoffNegative = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
inline constexpr double kEigenvalueTolerance = 1e-9;
/// Normalization denominators at or below this are treated as zero.
inline constexpr double kVacuumThreshold = 1e-12;

/// Number of retained basis states |0>..|d-1>; at least 2.
class FockDimension {
public:
    explicit FockDimension(int d) : d_(d) {
        if (d < 2) {
            throw Error(ErrorKind::InvalidArgument,
                        "Fock dimension must be at least 2, got " + std::to_string(d));
        }
    }

    int value() const noexcept { return d_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(d_); }

    friend bool operator==(FockDimension, FockDimension) = default;

private:
    int d_;
};

namespace detail {

inline void require_same_dim(FockDimension a, FockDimension b, const char* where) {
    if (a != b) {
        throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": dimension " +
                                                      std::to_string(a.value()) + " vs " +
                                                      std::to_string(b.value()));
    }
}

// Clamps roundoff negatives to zero and returns the sum. Throws on NaN or on
// negatives beyond roundoff.
inline double clamp_roundoff(std::vector<double>& p) {
    double total = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (!std::isfinite(p[n])) {
            throw Error(ErrorKind::InvalidState, "non-finite probability at n=" + std::to_string(n));
        }
        if (p[n] < 0.0) {
            if (p[n] < -kRoundoffNegative) {
                throw Error(ErrorKind::InvalidState, "negative probability " + std::to_string(p[n]) +
                                                         " at n=" + std::to_string(n));
            }
            p[n] = 0.0;
        }
        total += p[n];
    }
    return total;
}

}  // namespace detail

/// Photon-number distribution p(n) of a state diagonal in the number basis.
class PhotonDistribution {
public:
    /// Accepts probabilities that already sum to one (within 1e-10). Tiny
    /// negative roundoff is clamped and the result renormalized exactly.
    static PhotonDistribution from_probabilities(std::vector<double> p) {
        FockDimension dim(static_cast<int>(p.size()));
        const double total = detail::clamp_roundoff(p);
        if (std::abs(total - 1.0) > kProbabilityTolerance) {
            throw Error(ErrorKind::InvalidState,
                        "probabilities sum to " + std::to_string(total) + ", expected 1");
        }
        for (double& x : p) x /= total;
        return PhotonDistribution(dim, std::move(p));
    }

    /// Normalizes nonnegative weights to a distribution.
    static PhotonDistribution from_weights(std::vector<double> w) {
        FockDimension dim(static_cast<int>(w.size()));
        const double total = detail::clamp_roundoff(w);
        if (!(total > 0.0)) {
            throw Error(ErrorKind::InvalidState, "weights have zero total mass");
        }
        for (double& x : w) x /= total;
        return PhotonDistribution(dim, std::move(w));
    }

    FockDimension dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t n) const { return p_[n]; }
    std::span<const double> probabilities() const noexcept { return p_; }
    const std::vector<double>& values() const noexcept { return p_; }

    friend bool operator==(const PhotonDistribution&, const PhotonDistribution&) = default;

private:
    PhotonDistribution(FockDimension dim, std::vector<double> p) : dim_(dim), p_(std::move(p)) {}

    FockDimension dim_;
    std::vector<double> p_;
};

/// Hermitian, positive-semidefinite, unit-trace matrix over the truncated basis.
class DensityMatrix {
public:
    /// Validates the matrix; throws InvalidState naming the violated property.
    static DensityMatrix from_matrix(Matrix m) {
        if (m.rows() != m.cols()) {
            throw Error(ErrorKind::InvalidState, "density matrix must be square");
        }
        FockDimension dim(static_cast<int>(m.rows()));
        if (!m.allFinite()) {
            throw Error(ErrorKind::InvalidState, "density matrix has non-finite entries");
        }
        const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (asym > kProbabilityTolerance) {
            throw Error(ErrorKind::InvalidState,
                        "matrix is not Hermitian (max deviation " + std::to_string(asym) + ")");
        }
        const Complex tr = m.trace();
        if (std::abs(tr - Complex(1.0, 0.0)) > kProbabilityTolerance) {
            throw Error(ErrorKind::InvalidState, "trace is " + std::to_string(tr.real()) +
                                                     (tr.imag() != 0.0 ? " (complex)" : "") +
                                                     ", expected 1");
        }
        const Matrix herm = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
        const double min_eig = solver.eigenvalues().minCoeff();
        if (min_eig < -kEigenvalueTolerance) {
            throw Error(ErrorKind::InvalidState,
                        "matrix is not positive semidefinite (eigenvalue " +
                            std::to_string(min_eig) + ")");
        }
        return DensityMatrix(dim, std::move(m));
    }

    FockDimension dim() const noexcept { return dim_; }
    const Matrix& matrix() const noexcept { return m_; }
    Complex operator()(std::size_t row, std::size_t col) const {
        return m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }
    /// <n|rho|n>
    double population(std::size_t n) const { return (*this)(n, n).real(); }

private:
    DensityMatrix(FockDimension dim, Matrix m) : dim_(dim), m_(std::move(m)) {}

    FockDimension dim_;
    Matrix m_;
};

enum class OperatorKind { RaiseSG, LowerSG, Annihilate, Create, Number, Custom };

class FockOperator {
public:
    static FockOperator custom(Matrix m) {
        if (m.rows() != m.cols()) {
            throw Error(ErrorKind::InvalidArgument, "operator matrix must be square");
        }
        FockDimension dim(static_cast<int>(m.rows()));
        return FockOperator(OperatorKind::Custom, dim, std::move(m));
    }

    OperatorKind kind() const noexcept { return kind_; }
    FockDimension dim() const noexcept { return dim_; }
    const Matrix& matrix() const noexcept { return m_; }

    FockOperator adjoint() const { return custom(m_.adjoint()); }

    friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
        detail::require_same_dim(a.dim_, b.dim_, "operator product");
        return custom(a.m_ * b.m_);
    }

private:
    friend FockOperator make_operator(OperatorKind, FockDimension);

    FockOperator(OperatorKind kind, FockDimension dim, Matrix m)
        : kind_(kind), dim_(dim), m_(std::move(m)) {}

    OperatorKind kind_;
    FockDimension dim_;
    Matrix m_;
};

/// Builds the truncated matrix of a ladder or number operator.
///
///   RaiseSG    E+ = sum |n+1><n|
///   LowerSG    E- = sum |n><n+1|,  E-|0> = 0
///   Annihilate a  = sum sqrt(n+1) |n><n+1|
///   Create     a+ = sum sqrt(n+1) |n+1><n|
///   Number     n  = sum n |n><n|
inline FockOperator make_operator(OperatorKind kind, FockDimension dim) {
    const Eigen::Index d = dim.value();
    Matrix m = Matrix::Zero(d, d);
    switch (kind) {
        case OperatorKind::RaiseSG:
            for (Eigen::Index n = 0; n + 1 < d; ++n) m(n + 1, n) = 1.0;
            break;
        case OperatorKind::LowerSG:
            for (Eigen::Index n = 0; n + 1 < d; ++n) m(n, n + 1) = 1.0;
            break;
        case OperatorKind::Annihilate:
            for (Eigen::Index n = 0; n + 1 < d; ++n) m(n, n + 1) = std::sqrt(double(n + 1));
            break;
        case OperatorKind::Create:
            for (Eigen::Index n = 0; n + 1 < d; ++n) m(n + 1, n) = std::sqrt(double(n + 1));
            break;
        case OperatorKind::Number:
            for (Eigen::Index n = 0; n < d; ++n) m(n, n) = double(n);
            break;
        case OperatorKind::Custom:
            throw Error(ErrorKind::InvalidArgument,
                        "make_operator cannot build a Custom operator; use FockOperator::custom");
    }
    return FockOperator(kind, dim, std::move(m));
}

/// op^k; k = 0 gives the identity.
inline FockOperator power(const FockOperator& op, int k) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative operator power");
    const Eigen::Index d = op.dim().value();
    Matrix m = Matrix::Identity(d, d);
    for (int i = 0; i < k; ++i) m = m * op.matrix();
    return FockOperator::custom(std::move(m));
}

inline DensityMatrix from_distribution(const PhotonDistribution& p) {
    const Eigen::Index d = p.dim().value();
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index n = 0; n < d; ++n) m(n, n) = p[static_cast<std::size_t>(n)];
    return DensityMatrix::from_matrix(std::move(m));
}

/// Largest |rho(m,n)| with m != n.
inline double max_off_diagonal(const DensityMatrix& rho) {
    const Matrix& m = rho.matrix();
    double worst = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (r != c) worst = std::max(worst, std::abs(m(r, c)));
    return worst;
}

/// Extracts p(n) = <n|rho|n>. Throws NotDiagonalError when any coherence
/// exceeds `tol`: such states lie outside the discrete detection model.
inline PhotonDistribution diagonal_part(const DensityMatrix& rho,
                                        double tol = kProbabilityTolerance) {
    const double worst = max_off_diagonal(rho);
    if (worst > tol) throw NotDiagonalError(worst, tol);
    std::vector<double> p(rho.dim().size());
    for (std::size_t n = 0; n < p.size(); ++n) p[n] = rho.population(n);
    return PhotonDistribution::from_probabilities(std::move(p));
}

/// Re Tr(rho op). Exact for Hermitian operators.
inline double expectation(const DensityMatrix& rho, const FockOperator& op) {
    detail::require_same_dim(rho.dim(), op.dim(), "expectation");
    return (rho.matrix() * op.matrix()).trace().real();
}

}  // namespace fockdet
