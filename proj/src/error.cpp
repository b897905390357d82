#include "lmce/error.hpp"

namespace lmce {

const char* err_name(Err code) {
    switch (code) {
        case Err::InvalidInput: return "InvalidInput";
        case Err::NotPositiveDefinite: return "NotPositiveDefinite";
        case Err::InvalidPhase: return "InvalidPhase";
        case Err::NoAdmissibleEps: return "NoAdmissibleEps";
        case Err::UnsupportedPerturbation: return "UnsupportedPerturbation";
        case Err::RootNotBracketed: return "RootNotBracketed";
        case Err::OutOfDomain: return "OutOfDomain";
        case Err::DivergentShift: return "DivergentShift";
        case Err::BelowCStar: return "BelowCStar";
        case Err::StencilError: return "StencilError";
        case Err::MaxIterations: return "MaxIterations";
        case Err::SingularJacobian: return "SingularJacobian";
        case Err::PhaseEscape: return "PhaseEscape";
        case Err::BarrierSeparationFailed: return "BarrierSeparationFailed";
        case Err::SpliceOrderViolated: return "SpliceOrderViolated";
        case Err::SandwichViolated: return "SandwichViolated";
        case Err::FitDegenerate: return "FitDegenerate";
        case Err::Indeterminate: return "Indeterminate";
        case Err::InvalidBoundary: return "InvalidBoundary";
        case Err::RotationSingular: return "RotationSingular";
        case Err::InvalidConfig: return "InvalidConfig";
        case Err::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(Err code, const std::string& detail)
    : std::runtime_error(std::string(err_name(code)) + ": " + detail), code_(code) {}

void fail(Err code, const std::string& detail) { throw Error(code, detail); }

}  // namespace lmce
