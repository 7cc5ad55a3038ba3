#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace noir {

enum class ErrorCode {
  InvalidArgument,
  // signal-core
  InvalidBand,
  SegmentTooShort,
  StreamTooShort,
  ParseError,
  // ssvep
  AliasedHarmonic,
  DegenerateInput,
  NoVisualChannels,
  // mi
  SingularCovariance,
  InsufficientTrials,
  ShapeMismatch,
  TooFewTrials,
  DegenerateClass,
  NoMotorChannels,
  // emg
  Inseparable,
  WrongWindowLength,
  NoFrontalChannels,
  // cursor
  InvalidMode,
  // synth
  PlanExhausted,
  // world
  OutOfBounds,
  UnknownObject,
  UnknownSkill,
  UndeclaredObject,
  // learning
  UnsupportedDims,
  UnknownBackend,
  BackendMismatch,
  LineOutOfFrame,
  TerminalState,
  SingularCalibration,
  // orchestrator
  ConfigInvalid,
  CalibrationMissing,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace noir
