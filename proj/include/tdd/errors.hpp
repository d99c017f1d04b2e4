#pragma once

#include <stdexcept>
#include <string>

namespace tdd {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define TDD_DEFINE_ERROR(Name)                                    \
    struct Name : Error {                                         \
        explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
    }

TDD_DEFINE_ERROR(NotPSD);
TDD_DEFINE_ERROR(NonFinite);
TDD_DEFINE_ERROR(DimensionMismatch);
TDD_DEFINE_ERROR(NegativeTime);
TDD_DEFINE_ERROR(UndefinedAtZero);
TDD_DEFINE_ERROR(PoleOnAxis);
TDD_DEFINE_ERROR(TailNotResolved);
TDD_DEFINE_ERROR(LightConeViolation);
TDD_DEFINE_ERROR(SolverDiverged);
TDD_DEFINE_ERROR(SingularStep);
TDD_DEFINE_ERROR(UnderSampled);
TDD_DEFINE_ERROR(WindowTooShort);
TDD_DEFINE_ERROR(NotLossless);
TDD_DEFINE_ERROR(ConfigInvalid);
TDD_DEFINE_ERROR(PdcFailed);
TDD_DEFINE_ERROR(GridTooCoarse);
TDD_DEFINE_ERROR(NoArtifacts);

#undef TDD_DEFINE_ERROR

} // namespace tdd
