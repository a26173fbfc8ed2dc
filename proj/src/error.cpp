// SPDX-License-Identifier: Apache-2.0

#include "permverify/error.hpp"

namespace permverify {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TupleSpaceTooLarge: return "TupleSpaceTooLarge";
    case ErrorCode::TapeExhausted: return "TapeExhausted";
    case ErrorCode::ForkUnsupported: return "ForkUnsupported";
    case ErrorCode::IncompatibleSource: return "IncompatibleSource";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::SpaceTooLarge: return "SpaceTooLarge";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::FactorialTooLarge: return "FactorialTooLarge";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BelowMinimumTrials: return "BelowMinimumTrials";
    case ErrorCode::NoUsableCases: return "NoUsableCases";
    case ErrorCode::SubsetTooSmall: return "SubsetTooSmall";
    case ErrorCode::CounterOverflow: return "CounterOverflow";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace permverify
