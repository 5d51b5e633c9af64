#pragma once

#include <stdexcept>
#include <string>

namespace dyntrack {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DYNTRACK_DEFINE_ERROR(Name)     \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

DYNTRACK_DEFINE_ERROR(FrameMismatch)
DYNTRACK_DEFINE_ERROR(NonPositiveDepth)
DYNTRACK_DEFINE_ERROR(BehindCamera)
DYNTRACK_DEFINE_ERROR(InvalidConfig)
DYNTRACK_DEFINE_ERROR(OutOfRange)
DYNTRACK_DEFINE_ERROR(NonPositiveDt)
DYNTRACK_DEFINE_ERROR(UnsupportedViewCount)
DYNTRACK_DEFINE_ERROR(MissingTruth)
DYNTRACK_DEFINE_ERROR(EmptyCandidates)
DYNTRACK_DEFINE_ERROR(EmptyModel)
DYNTRACK_DEFINE_ERROR(EmptyInput)
DYNTRACK_DEFINE_ERROR(LengthMismatch)
DYNTRACK_DEFINE_ERROR(OutOfOrderFrame)
DYNTRACK_DEFINE_ERROR(ParseError)

#undef DYNTRACK_DEFINE_ERROR

}  // namespace dyntrack
