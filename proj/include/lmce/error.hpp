#pragma once

#include <stdexcept>
#include <string>

namespace lmce {

// Failure taxonomy shared by all modules. Codes are stable identifiers that
// also appear in machine-readable error JSON emitted by the CLI.
enum class Err {
    InvalidInput,
    NotPositiveDefinite,
    InvalidPhase,
    NoAdmissibleEps,
    UnsupportedPerturbation,
    RootNotBracketed,
    OutOfDomain,
    DivergentShift,
    BelowCStar,
    StencilError,
    MaxIterations,
    SingularJacobian,
    PhaseEscape,
    BarrierSeparationFailed,
    SpliceOrderViolated,
    SandwichViolated,
    FitDegenerate,
    Indeterminate,
    InvalidBoundary,
    RotationSingular,
    InvalidConfig,
    IoError,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
  public:
    Error(Err code, const std::string& detail);
    Err code() const { return code_; }

  private:
    Err code_;
};

[[noreturn]] void fail(Err code, const std::string& detail);

}  // namespace lmce
