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

#include <stdexcept>
#include <string>
#include <string_view>

namespace fockdet {

enum class ErrorKind {
    InvalidArgument,
    DimensionMismatch,
    InvalidState,
    NotDiagonal,
    VacuumState,
    InsufficientPhotons,
    TruncationOverflow,
    InvalidWeights,
    ZeroEvidence,
    OutOfRange,
    NoDetections,
    Validation,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidState: return "InvalidState";
        case ErrorKind::NotDiagonal: return "NotDiagonal";
        case ErrorKind::VacuumState: return "VacuumState";
        case ErrorKind::InsufficientPhotons: return "InsufficientPhotons";
        case ErrorKind::TruncationOverflow: return "TruncationOverflow";
        case ErrorKind::InvalidWeights: return "InvalidWeights";
        case ErrorKind::ZeroEvidence: return "ZeroEvidence";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::NoDetections: return "NoDetections";
        case ErrorKind::Validation: return "ValidationError";
    }
    return "Unknown";
}

/// Base class of every error raised by the library. `kind()` identifies the
/// failure class; the message carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when a state that must be diagonal in the number basis carries
/// coherences. Reports the largest off-diagonal magnitude found.
class NotDiagonalError : public Error {
public:
    NotDiagonalError(double magnitude, double tol)
        : Error(ErrorKind::NotDiagonal,
                "largest off-diagonal magnitude " + std::to_string(magnitude) +
                    " exceeds tolerance " + std::to_string(tol)),
          magnitude_(magnitude) {}

    double magnitude() const noexcept { return magnitude_; }

private:
    double magnitude_;
};

/// Failure of an N-photon shift (InsufficientPhotons or TruncationOverflow).
class ShiftError : public Error {
public:
    ShiftError(ErrorKind kind, int n_events, const std::string& what)
        : Error(kind, "N=" + std::to_string(n_events) + ": " + what), n_events_(n_events) {}

    int n_events() const noexcept { return n_events_; }

private:
    int n_events_;
};

}  // namespace fockdet
