#pragma once

#include <stdexcept>
#include <string>

namespace insole {

// Fine-grained fault codes. Each maps onto one of the coarse C API /
// process exit categories via category().
enum class Fault {
  // argument / precondition
  InvalidArgument,
  WindowTooLong,
  NonPositiveBaseline,
  FewerThanTwoEvents,
  // input / schema
  SchemaError,
  UnitError,
  EmptyFile,
  IoError,
  InsufficientOverlap,
  TooManyInvalidSamples,
  // numeric
  UnstableBlock,
  DivergedOptimization,
  // degenerate data
  RankDeficientRegressor,
  DegenerateChannel,
  NoCyclesFound,
  ConstantReference,
  DegenerateNormalizer,
};

enum class FaultCategory { Argument = 1, Input = 2, Numeric = 3, Degenerate = 4 };

FaultCategory category(Fault f);
const char *fault_name(Fault f);

class PipelineError : public std::runtime_error {
public:
  PipelineError(Fault fault, const std::string &msg)
      : std::runtime_error(std::string(fault_name(fault)) + ": " + msg),
        fault_(fault) {}

  Fault fault() const { return fault_; }
  FaultCategory fault_category() const { return category(fault_); }

private:
  Fault fault_;
};

[[noreturn]] inline void raise(Fault fault, const std::string &msg) {
  throw PipelineError(fault, msg);
}

inline void require(bool cond, Fault fault, const std::string &msg) {
  if (!cond)
    raise(fault, msg);
}

} // namespace insole
