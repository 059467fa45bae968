#pragma once

#include <stdexcept>
#include <string>

namespace boltz {

/// Base class for every domain error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BOLTZ_DEFINE_ERROR(Name)                \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  }

BOLTZ_DEFINE_ERROR(NonPositiveA0);
BOLTZ_DEFINE_ERROR(InvalidKernel);
BOLTZ_DEFINE_ERROR(ZeroMass);
BOLTZ_DEFINE_ERROR(DiracTemperature);
BOLTZ_DEFINE_ERROR(UnsupportedScheme);
BOLTZ_DEFINE_ERROR(MomentHypothesisViolated);
BOLTZ_DEFINE_ERROR(InadmissibleExponent);
BOLTZ_DEFINE_ERROR(CoincidentPair);
BOLTZ_DEFINE_ERROR(MajorantViolated);
BOLTZ_DEFINE_ERROR(DomainOverflow);
BOLTZ_DEFINE_ERROR(InsufficientTemporalResolution);
BOLTZ_DEFINE_ERROR(KernelDimensionMismatch);
BOLTZ_DEFINE_ERROR(InvalidD0);
BOLTZ_DEFINE_ERROR(EmptyWindow);
BOLTZ_DEFINE_ERROR(ConfigInvalid);

#undef BOLTZ_DEFINE_ERROR

}  // namespace boltz
