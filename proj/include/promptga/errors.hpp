#pragma once

#include <stdexcept>
#include <string>

namespace promptga {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PROMPTGA_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

PROMPTGA_DEFINE_ERROR(ParseError);
PROMPTGA_DEFINE_ERROR(ValidationError);
PROMPTGA_DEFINE_ERROR(RangeError);
PROMPTGA_DEFINE_ERROR(StateError);
PROMPTGA_DEFINE_ERROR(SaturationError);
PROMPTGA_DEFINE_ERROR(DataError);
PROMPTGA_DEFINE_ERROR(CapacityError);
PROMPTGA_DEFINE_ERROR(ConfigError);
PROMPTGA_DEFINE_ERROR(FitError);
PROMPTGA_DEFINE_ERROR(ConflictError);
PROMPTGA_DEFINE_ERROR(NotFoundError);
PROMPTGA_DEFINE_ERROR(AccessError);
PROMPTGA_DEFINE_ERROR(NotReadyError);
PROMPTGA_DEFINE_ERROR(ReplayError);
PROMPTGA_DEFINE_ERROR(IoError);

#undef PROMPTGA_DEFINE_ERROR

}  // namespace promptga
