#include "flexwave/errors.hpp"

namespace flexwave {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain:
      return "domain";
    case ErrorKind::Config:
      return "config";
    case ErrorKind::Solver:
      return "solver";
    case ErrorKind::Validation:
      return "validation";
    case ErrorKind::Io:
      return "io";
  }
  return "unknown";
}

}  // namespace flexwave
