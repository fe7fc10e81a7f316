#include "error.hpp"

namespace insole {

FaultCategory category(Fault f) {
  switch (f) {
  case Fault::InvalidArgument:
  case Fault::WindowTooLong:
  case Fault::NonPositiveBaseline:
  case Fault::FewerThanTwoEvents:
    return FaultCategory::Argument;
  case Fault::SchemaError:
  case Fault::UnitError:
  case Fault::EmptyFile:
  case Fault::IoError:
  case Fault::InsufficientOverlap:
  case Fault::TooManyInvalidSamples:
    return FaultCategory::Input;
  case Fault::UnstableBlock:
  case Fault::DivergedOptimization:
    return FaultCategory::Numeric;
  case Fault::RankDeficientRegressor:
  case Fault::DegenerateChannel:
  case Fault::NoCyclesFound:
  case Fault::ConstantReference:
  case Fault::DegenerateNormalizer:
    return FaultCategory::Degenerate;
  }
  return FaultCategory::Argument;
}

const char *fault_name(Fault f) {
  switch (f) {
  case Fault::InvalidArgument: return "InvalidArgument";
  case Fault::WindowTooLong: return "WindowTooLong";
  case Fault::NonPositiveBaseline: return "NonPositiveBaseline";
  case Fault::FewerThanTwoEvents: return "FewerThanTwoEvents";
  case Fault::SchemaError: return "SchemaError";
  case Fault::UnitError: return "UnitError";
  case Fault::EmptyFile: return "EmptyFile";
  case Fault::IoError: return "IoError";
  case Fault::InsufficientOverlap: return "InsufficientOverlap";
  case Fault::TooManyInvalidSamples: return "TooManyInvalidSamples";
  case Fault::UnstableBlock: return "UnstableBlock";
  case Fault::DivergedOptimization: return "DivergedOptimization";
  case Fault::RankDeficientRegressor: return "RankDeficientRegressor";
  case Fault::DegenerateChannel: return "DegenerateChannel";
  case Fault::NoCyclesFound: return "NoCyclesFound";
  case Fault::ConstantReference: return "ConstantReference";
  case Fault::DegenerateNormalizer: return "DegenerateNormalizer";
  }
  return "Unknown";
}

} // namespace insole
