#pragma once

#include <stdexcept>
#include <string>

namespace rtb {

// Numerical failures map to CLI exit code 1; DomainError is an input problem (exit 2).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define RTB_ERROR(Name)                                              \
  struct Name : Error {                                              \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

RTB_ERROR(DomainError);
RTB_ERROR(NoConvergence);
RTB_ERROR(AmbiguousRoot);
RTB_ERROR(CutCollision);
RTB_ERROR(BranchAmbiguity);
RTB_ERROR(FitIllConditioned);
RTB_ERROR(EnergyDriftExceeded);
RTB_ERROR(Escaped);
RTB_ERROR(InsufficientCycles);
RTB_ERROR(NoExit);
RTB_ERROR(ModulusOutOfRange);
RTB_ERROR(PhaseConstraintViolated);
RTB_ERROR(WrongBasin);
RTB_ERROR(NoExponentialWindow);

#undef RTB_ERROR

}  // namespace rtb
