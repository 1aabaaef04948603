#pragma once

#include <stdexcept>
#include <string>

namespace qp {

enum class ErrorKind {
  NoApproximant,
  ColinearityViolation,
  NormViolation,
  NotInSQ,
  DuplicateIndex,
  DimensionCap,
  ResonantBase,
  OverlapDetected,
  NotGenerator,
  ContourHit,
  NonConvergent,
  NotUnique,
  NoRoot,
  IoError,
  ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(K, what) {}
};

using NoApproximant = TypedError<ErrorKind::NoApproximant>;
using ColinearityViolation = TypedError<ErrorKind::ColinearityViolation>;
using NormViolation = TypedError<ErrorKind::NormViolation>;
using NotInSQ = TypedError<ErrorKind::NotInSQ>;
using DuplicateIndex = TypedError<ErrorKind::DuplicateIndex>;
using DimensionCap = TypedError<ErrorKind::DimensionCap>;
using ResonantBase = TypedError<ErrorKind::ResonantBase>;
using OverlapDetected = TypedError<ErrorKind::OverlapDetected>;
using NotGenerator = TypedError<ErrorKind::NotGenerator>;
using ContourHit = TypedError<ErrorKind::ContourHit>;
using NonConvergent = TypedError<ErrorKind::NonConvergent>;
using NotUnique = TypedError<ErrorKind::NotUnique>;
using NoRoot = TypedError<ErrorKind::NoRoot>;
using IoError = TypedError<ErrorKind::IoError>;
using ConfigError = TypedError<ErrorKind::ConfigError>;

}  // namespace qp
