#include "qp/errors.hpp"

namespace qp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoApproximant: return "NoApproximant";
    case ErrorKind::ColinearityViolation: return "ColinearityViolation";
    case ErrorKind::NormViolation: return "NormViolation";
    case ErrorKind::NotInSQ: return "NotInSQ";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::DimensionCap: return "DimensionCap";
    case ErrorKind::ResonantBase: return "ResonantBase";
    case ErrorKind::OverlapDetected: return "OverlapDetected";
    case ErrorKind::NotGenerator: return "NotGenerator";
    case ErrorKind::ContourHit: return "ContourHit";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::NotUnique: return "NotUnique";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace qp
