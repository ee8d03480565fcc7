#pragma once
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace a2lab {

using Index = std::int32_t;
using Vec = std::vector<double>;

// Base of every library error. Callers that only care about "something went
// wrong in a2lab" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define A2LAB_ERROR(Name)                      \
    class Name : public Error {                \
    public:                                    \
        using Error::Error;                    \
    };

A2LAB_ERROR(TriangleViolation)
A2LAB_ERROR(NonSymmetric)
A2LAB_ERROR(InvalidSpace)
A2LAB_ERROR(EnumerationTooLarge)
A2LAB_ERROR(NoParentInRange)
A2LAB_ERROR(CoverGap)
A2LAB_ERROR(ProximityViolation)
A2LAB_ERROR(TooLarge)
A2LAB_ERROR(NotInWS)
A2LAB_ERROR(InjectivityFailure)
A2LAB_ERROR(AExceedsP)
A2LAB_ERROR(ZeroMassSon)
A2LAB_ERROR(DegenerateWeight)
A2LAB_ERROR(TreeTooShallow)
A2LAB_ERROR(NoConvergence)
A2LAB_ERROR(DomainExit)
A2LAB_ERROR(ProfileViolation)
A2LAB_ERROR(EnumerationInfeasible)
A2LAB_ERROR(CoefficientOverflow)
A2LAB_ERROR(ConfigError)
A2LAB_ERROR(IoError)
A2LAB_ERROR(ViolationReport)
A2LAB_ERROR(ExperimentFailed)

#undef A2LAB_ERROR

const char* version();

}  // namespace a2lab
