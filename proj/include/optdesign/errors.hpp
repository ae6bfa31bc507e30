#pragma once

#include <stdexcept>
#include <string>

namespace optdesign {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define OPTDESIGN_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                          \
  public:                                                               \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}  \
  }

// symlin
OPTDESIGN_DEFINE_ERROR(DimensionMismatch);
OPTDESIGN_DEFINE_ERROR(LengthNotTriangular);
OPTDESIGN_DEFINE_ERROR(EigenFailure);
OPTDESIGN_DEFINE_ERROR(DomainViolation);
OPTDESIGN_DEFINE_ERROR(FunctionUndefined);

// criteria
OPTDESIGN_DEFINE_ERROR(NotPositiveDefinite);
OPTDESIGN_DEFINE_ERROR(SingularInformationMatrix);
OPTDESIGN_DEFINE_ERROR(NegativeCurvature);
OPTDESIGN_DEFINE_ERROR(RankDeficient);

// problem
OPTDESIGN_DEFINE_ERROR(DegenerateDesign);
OPTDESIGN_DEFINE_ERROR(ZeroAtom);
OPTDESIGN_DEFINE_ERROR(NotOnSimplex);

// solvers
OPTDESIGN_DEFINE_ERROR(NotInterior);
OPTDESIGN_DEFINE_ERROR(LineSearchStalled);
OPTDESIGN_DEFINE_ERROR(CapacitanceSingular);
OPTDESIGN_DEFINE_ERROR(DegenerateScores);

// bench / io
OPTDESIGN_DEFINE_ERROR(RankDeficientAfterRetries);
OPTDESIGN_DEFINE_ERROR(ParseError);
OPTDESIGN_DEFINE_ERROR(IoError);
OPTDESIGN_DEFINE_ERROR(ConfigError);

#undef OPTDESIGN_DEFINE_ERROR

}  // namespace optdesign
