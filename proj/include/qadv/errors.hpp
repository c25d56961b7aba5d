#pragma once

#include <stdexcept>
#include <string>

namespace qadv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define QADV_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

QADV_DEFINE_ERROR(SyntaxError);
QADV_DEFINE_ERROR(ReadOnceViolation);
QADV_DEFINE_ERROR(LengthMismatch);
QADV_DEFINE_ERROR(SizeLimit);
QADV_DEFINE_ERROR(InvalidWeight);
QADV_DEFINE_ERROR(SupportViolation);
QADV_DEFINE_ERROR(DegenerateNu);
QADV_DEFINE_ERROR(BadEpsilon);
QADV_DEFINE_ERROR(NonConvergence);
QADV_DEFINE_ERROR(DimensionMismatch);
QADV_DEFINE_ERROR(NonUnitary);
QADV_DEFINE_ERROR(InvalidProjector);

#undef QADV_DEFINE_ERROR

}  // namespace qadv
