#pragma once

#include <stdexcept>
#include <string>

namespace buggin {

// Base of every error raised by the toolkit. Subclasses name the failure
// class; the message carries row/field/id context.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define BUGGIN_DEFINE_ERROR(Name)      \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

BUGGIN_DEFINE_ERROR(SchemaError);
BUGGIN_DEFINE_ERROR(ParseError);
BUGGIN_DEFINE_ERROR(UniquenessError);
BUGGIN_DEFINE_ERROR(StratificationError);
BUGGIN_DEFINE_ERROR(NotFoundError);
BUGGIN_DEFINE_ERROR(TransportError);
BUGGIN_DEFINE_ERROR(DecodeError);
BUGGIN_DEFINE_ERROR(FormatError);
BUGGIN_DEFINE_ERROR(ValidationError);
BUGGIN_DEFINE_ERROR(LookupError);
BUGGIN_DEFINE_ERROR(EmptyVocabularyError);
BUGGIN_DEFINE_ERROR(BalanceError);
BUGGIN_DEFINE_ERROR(InsufficientMinorityError);
BUGGIN_DEFINE_ERROR(WeightError);
BUGGIN_DEFINE_ERROR(DimensionError);
BUGGIN_DEFINE_ERROR(TrainingError);
BUGGIN_DEFINE_ERROR(ConfigError);
BUGGIN_DEFINE_ERROR(UndefinedMetricError);
BUGGIN_DEFINE_ERROR(SearchError);
BUGGIN_DEFINE_ERROR(IoError);

#undef BUGGIN_DEFINE_ERROR

// Raised when an iterative solver hits its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (final residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Wraps any failure inside run_experiment with the stage it happened in.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace buggin
