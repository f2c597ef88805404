#include "ssc/errors.hpp"

namespace ssc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::kNegativeOffDiagonal: return "NEGATIVE_OFF_DIAGONAL";
        case ErrorCode::kRowSumNonzero: return "ROW_SUM_NONZERO";
        case ErrorCode::kZeroDiagonalInStrictMode: return "ZERO_DIAGONAL_IN_STRICT_MODE";
        case ErrorCode::kNotNonincreasing: return "NOT_NONINCREASING";
        case ErrorCode::kNonpositiveAtOrigin: return "NONPOSITIVE_AT_ORIGIN";
        case ErrorCode::kNonpositiveParameter: return "NONPOSITIVE_PARAMETER";
        case ErrorCode::kDerivativeUnavailable: return "DERIVATIVE_UNAVAILABLE";
        case ErrorCode::kOutOfGrid: return "OUT_OF_GRID";
        case ErrorCode::kNotConverged: return "NOT_CONVERGED";
        case ErrorCode::kNonmonotoneDiffusion: return "NONMONOTONE_DIFFUSION";
        case ErrorCode::kSingularSystem: return "SINGULAR_SYSTEM";
        case ErrorCode::kH1Violated: return "H1_VIOLATED";
        case ErrorCode::kNoOracle: return "NO_ORACLE";
        case ErrorCode::kNanState: return "NAN_STATE";
        case ErrorCode::kRegionUnavailable: return "REGION_UNAVAILABLE";
        case ErrorCode::kConfig: return "CONFIG";
    }
    return "UNKNOWN";
}

}  // namespace ssc
