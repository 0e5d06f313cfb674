#pragma once

#include <stdexcept>
#include <string>

namespace smoothlab {

enum class ErrorKind {
    InvalidArgument,
    InvalidConfig,
    Io,
    NonConvergence,
    Singular,
    Underflow,
    NotDiagonalizable,
    ComplexSpectrum,
    PerronViolation,
    ZeroCoefficient,
    InternalInconsistency,
    Degenerate,
    NotApplicable,
    Overflow,
    SingularBasis,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

} // namespace smoothlab
