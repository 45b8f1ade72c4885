// Error taxonomy. Every failure mode named by the pipeline maps to a stable
// process exit code so callers can tell stages apart without parsing text.
#pragma once

#include <stdexcept>
#include <string>

namespace partgrasp {

enum class ErrorCode : int {
  Generic = 1,
  Config = 2,          // bad config / missing input file / parse failures
  InvalidLabel = 3,
  NoDetection = 4,
  EmptyRegion = 5,
  RegionTooSmall = 6,
  BackendUnavailable = 7,
  MalformedResponse = 8,
  EmptyMesh = 9,
  BoxOutsideImage = 10,
  OutOfRange = 11,
  MissingSurveyRow = 12,
  DuplicateObject = 13,
  EmptyGraspSet = 14,
  InvalidFraction = 15,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

#define PARTGRASP_DEFINE_ERROR(Name, Code)                      \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what)                      \
        : Error(ErrorCode::Code, std::string(#Name ": ") + what) {} \
  }

PARTGRASP_DEFINE_ERROR(ParseError, Config);
PARTGRASP_DEFINE_ERROR(ConfigError, Config);
PARTGRASP_DEFINE_ERROR(FixtureParseError, Config);
PARTGRASP_DEFINE_ERROR(EmptyMesh, EmptyMesh);
PARTGRASP_DEFINE_ERROR(InvalidLabel, InvalidLabel);
PARTGRASP_DEFINE_ERROR(NoDetection, NoDetection);
PARTGRASP_DEFINE_ERROR(EmptyRegion, EmptyRegion);
PARTGRASP_DEFINE_ERROR(BoxOutsideImage, BoxOutsideImage);
PARTGRASP_DEFINE_ERROR(RegionTooSmall, RegionTooSmall);
PARTGRASP_DEFINE_ERROR(BackendUnavailable, BackendUnavailable);
PARTGRASP_DEFINE_ERROR(MalformedResponse, MalformedResponse);
PARTGRASP_DEFINE_ERROR(OutOfRange, OutOfRange);
PARTGRASP_DEFINE_ERROR(MissingSurveyRow, MissingSurveyRow);
PARTGRASP_DEFINE_ERROR(DuplicateObject, DuplicateObject);
PARTGRASP_DEFINE_ERROR(EmptyGraspSet, EmptyGraspSet);
PARTGRASP_DEFINE_ERROR(InvalidFraction, InvalidFraction);

#undef PARTGRASP_DEFINE_ERROR

}  // namespace partgrasp
