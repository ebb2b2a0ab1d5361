#pragma once

#include <stdexcept>
#include <string>

namespace so3bt {

// Base of every error thrown by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on the inputs was violated (bad level, bad grid, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical verification did not hold.
class VerificationError : public Error {
 public:
  using Error::Error;
};

#define SO3BT_DEFINE_ERROR(Name, Base) \
  class Name : public Base {           \
   public:                             \
    using Base::Base;                  \
  }

SO3BT_DEFINE_ERROR(DegenerateModulus, DomainError);
SO3BT_DEFINE_ERROR(GridTooCoarse, DomainError);
SO3BT_DEFINE_ERROR(SymbolNotEven, DomainError);
SO3BT_DEFINE_ERROR(NotInvariant, DomainError);
SO3BT_DEFINE_ERROR(UnknownKnot, DomainError);
SO3BT_DEFINE_ERROR(ColorOutOfRange, DomainError);
SO3BT_DEFINE_ERROR(DegeneratePolynomial, DomainError);
SO3BT_DEFINE_ERROR(SubspaceNotPreserved, VerificationError);
SO3BT_DEFINE_ERROR(IsomorphismViolation, VerificationError);
SO3BT_DEFINE_ERROR(NonDecaying, VerificationError);

#undef SO3BT_DEFINE_ERROR

}  // namespace so3bt
