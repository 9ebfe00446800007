#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

// All failure modes surface as typed exceptions. Callers that must not abort
// (sweep loops) catch SimError and record the message per point.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

#define OPTOMECH_ERROR_TYPE(Name)                                  \
    class Name : public SimError {                                 \
    public:                                                        \
        explicit Name(const std::string& msg)                      \
            : SimError(std::string(#Name) + ": " + msg) {}         \
    }

OPTOMECH_ERROR_TYPE(SpaceMismatch);
OPTOMECH_ERROR_TYPE(NonFinite);
OPTOMECH_ERROR_TYPE(TruncationTooSmall);
OPTOMECH_ERROR_TYPE(IndexOutOfRange);
OPTOMECH_ERROR_TYPE(UnknownSlot);
OPTOMECH_ERROR_TYPE(UnstableRegime);
OPTOMECH_ERROR_TYPE(UnsupportedPhase);
OPTOMECH_ERROR_TYPE(DimensionTooLarge);
OPTOMECH_ERROR_TYPE(SingularSystem);
OPTOMECH_ERROR_TYPE(StepRejected);
OPTOMECH_ERROR_TYPE(TruncationLeak);
OPTOMECH_ERROR_TYPE(VacuumDivergence);
OPTOMECH_ERROR_TYPE(PadTooSmall);
OPTOMECH_ERROR_TYPE(ConfigParse);
OPTOMECH_ERROR_TYPE(UnknownScenario);
OPTOMECH_ERROR_TYPE(IOFailure);

#undef OPTOMECH_ERROR_TYPE

}  // namespace optomech
