#pragma once

#include <stdexcept>
#include <string>

namespace utb {

enum class ErrorKind {
  FieldMismatch,
  ArityMismatch,
  DivisionByZero,
  StarCondition,
  Parse,
  AllPoles,
  UnknownGenerator,
  NotUpperTriangular,
  InvalidArgument,
  Overflow,
  UnitRelation,
  Unsupported,
  Admissibility,
  Infeasible,
  Blowup,
  Budget,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace utb
