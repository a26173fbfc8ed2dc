// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace permverify {

enum class ErrorCode {
    DuplicateIndex,
    OutOfRange,
    TupleSpaceTooLarge,
    TapeExhausted,
    ForkUnsupported,
    IncompatibleSource,
    InvalidSpec,
    SpaceTooLarge,
    EnumerationTooLarge,
    FactorialTooLarge,
    TooFewSamples,
    DimensionMismatch,
    BelowMinimumTrials,
    NoUsableCases,
    SubsetTooSmall,
    CounterOverflow,
    MalformedFile,
    Io,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures surface as this exception; `code()` tells callers
/// which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace permverify
