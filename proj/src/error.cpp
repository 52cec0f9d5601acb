#include "impreg/error.hpp"

namespace impreg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::OutsideSupport: return "outside_support";
    case ErrorCode::NotSymmetric: return "not_symmetric";
    case ErrorCode::NotPositiveDefinite: return "not_positive_definite";
    case ErrorCode::IllConditioned: return "ill_conditioned";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::EmptyInstance: return "empty_instance";
    case ErrorCode::ZeroNorm: return "zero_norm";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace impreg
