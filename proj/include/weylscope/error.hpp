#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace weylscope {

enum class ErrorCode {
    InvalidArgument,
    NonConvex,
    NotStarShaped,
    QuadratureFailure,
    GlancingInput,
    IntersectionFailure,
    NoOrbitFound,
    SpectrumTooShort,
    IsolatedFamily,
    BasisDeficiency,
    MissedEigenvalueSuspicion,
    MissingNormalization,
    BeyondValidity,
    DegenerateFit,
    UnsupportedKind,
    EpsilonTooLarge,
    GridTooShort,
    ConfigError,
    MissingArtifact,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvex: return "NonConvex";
    case ErrorCode::NotStarShaped: return "NotStarShaped";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::GlancingInput: return "GlancingInput";
    case ErrorCode::IntersectionFailure: return "IntersectionFailure";
    case ErrorCode::NoOrbitFound: return "NoOrbitFound";
    case ErrorCode::SpectrumTooShort: return "SpectrumTooShort";
    case ErrorCode::IsolatedFamily: return "IsolatedFamily";
    case ErrorCode::BasisDeficiency: return "BasisDeficiency";
    case ErrorCode::MissedEigenvalueSuspicion: return "MissedEigenvalueSuspicion";
    case ErrorCode::MissingNormalization: return "MissingNormalization";
    case ErrorCode::BeyondValidity: return "BeyondValidity";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::UnsupportedKind: return "UnsupportedKind";
    case ErrorCode::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorCode::GridTooShort: return "GridTooShort";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    }
    return "Unknown";
}

} // namespace weylscope
