#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

enum class ErrorKind {
  configuration,
  domain,
  geometry,
  metric_validity,
  integration,
  numerical_integrity,
  precondition,
  range,
};

const char* to_string(ErrorKind kind);

// Base for every error raised by the library.  The kind drives the CLI exit
// code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

#define FINSLER_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

FINSLER_DEFINE_ERROR(ConfigurationError, configuration)
FINSLER_DEFINE_ERROR(DomainError, domain)
FINSLER_DEFINE_ERROR(GeometryError, geometry)
FINSLER_DEFINE_ERROR(MetricValidityError, metric_validity)
FINSLER_DEFINE_ERROR(IntegrationError, integration)
FINSLER_DEFINE_ERROR(NumericalIntegrityError, numerical_integrity)
FINSLER_DEFINE_ERROR(PreconditionError, precondition)
FINSLER_DEFINE_ERROR(RangeError, range)

#undef FINSLER_DEFINE_ERROR

}  // namespace finsler
