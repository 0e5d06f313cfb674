#include "smoothlab/errors.hpp"

namespace smoothlab {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::Underflow: return "Underflow";
    case ErrorKind::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorKind::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorKind::PerronViolation: return "PerronViolation";
    case ErrorKind::ZeroCoefficient: return "ZeroCoefficient";
    case ErrorKind::InternalInconsistency: return "InternalInconsistency";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SingularBasis: return "SingularBasis";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

} // namespace smoothlab
