#pragma once

#include <stdexcept>
#include <string>

namespace regor {

/// Base class for every failure raised by the library. `kind()` is a stable
/// identifier used in structured CLI error output.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define REGOR_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

REGOR_DEFINE_ERROR(InvalidArgument)
REGOR_DEFINE_ERROR(DegenerateInput)
REGOR_DEFINE_ERROR(EmptyCloud)
REGOR_DEFINE_ERROR(EmptySet)
REGOR_DEFINE_ERROR(EmptyInput)
REGOR_DEFINE_ERROR(EmptyDataset)
REGOR_DEFINE_ERROR(DimensionMismatch)
REGOR_DEFINE_ERROR(TooFewPoints)
REGOR_DEFINE_ERROR(TooFewConsistent)
REGOR_DEFINE_ERROR(InvalidSpec)
REGOR_DEFINE_ERROR(InvalidConfig)
REGOR_DEFINE_ERROR(IoError)
REGOR_DEFINE_ERROR(ParseError)
REGOR_DEFINE_ERROR(UnsupportedFormat)
REGOR_DEFINE_ERROR(IndexOutOfRange)

#undef REGOR_DEFINE_ERROR

}  // namespace regor
