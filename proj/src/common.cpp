#include "common.hpp"

namespace dislocgeo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::SingularGeometry: return "singular_geometry";
    case ErrorCode::DegeneratePlasticity: return "degenerate_plasticity";
    case ErrorCode::InvertedElement: return "inverted_element";
    case ErrorCode::Indefinite: return "indefinite";
    case ErrorCode::InvalidMatrix: return "invalid_matrix";
    case ErrorCode::UnsupportedGeometry: return "unsupported_geometry";
    case ErrorCode::InvalidLoop: return "invalid_loop";
    case ErrorCode::Singularity: return "singularity";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace dislocgeo
