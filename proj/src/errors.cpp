#include "finsler/errors.hpp"

namespace finsler {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::domain: return "domain";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::metric_validity: return "metric_validity";
    case ErrorKind::integration: return "integration";
    case ErrorKind::numerical_integrity: return "numerical_integrity";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::range: return "range";
  }
  return "unknown";
}

}  // namespace finsler
