#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssc {

enum class ErrorCode {
    kInvalidArgument,
    kNegativeOffDiagonal,
    kRowSumNonzero,
    kZeroDiagonalInStrictMode,
    kNotNonincreasing,
    kNonpositiveAtOrigin,
    kNonpositiveParameter,
    kDerivativeUnavailable,
    kOutOfGrid,
    kNotConverged,
    kNonmonotoneDiffusion,
    kSingularSystem,
    kH1Violated,
    kNoOracle,
    kNanState,
    kRegionUnavailable,
    kConfig,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a stable error code; `what()` holds the diagnostic.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ssc
