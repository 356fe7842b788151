#pragma once

#include <stdexcept>
#include <string>

namespace psvar {

/// Base for every diagnostic raised by the toolkit. `kind()` is a short
/// machine-readable tag; `what()` carries the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PSVAR_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(tag, message) {} \
  };

PSVAR_DEFINE_ERROR(ParseError, "parse")
PSVAR_DEFINE_ERROR(ValidationError, "validation")
PSVAR_DEFINE_ERROR(LookupError, "lookup")
PSVAR_DEFINE_ERROR(DomainError, "domain")
PSVAR_DEFINE_ERROR(SingularityError, "singularity")
PSVAR_DEFINE_ERROR(InsufficientDataError, "insufficient-data")
PSVAR_DEFINE_ERROR(CoverageError, "coverage")
PSVAR_DEFINE_ERROR(SampleSizeError, "sample-size")
PSVAR_DEFINE_ERROR(CollinearityError, "collinearity")
PSVAR_DEFINE_ERROR(FactorizationError, "factorization")
PSVAR_DEFINE_ERROR(DegenerateError, "degenerate")
PSVAR_DEFINE_ERROR(ContractError, "contract")
PSVAR_DEFINE_ERROR(PreconditionError, "precondition")
PSVAR_DEFINE_ERROR(BootstrapError, "bootstrap")

#undef PSVAR_DEFINE_ERROR

/// Wraps an error with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}

  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace psvar
