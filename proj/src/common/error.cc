#include "rrsb/common/error.h"

namespace rrsb {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed:
      return "malformed";
    case ErrorCode::kPrecondition:
      return "precondition";
    case ErrorCode::kOrdering:
      return "ordering";
    case ErrorCode::kTransport:
      return "transport";
    case ErrorCode::kProtocol:
      return "protocol";
    case ErrorCode::kInvalidSample:
      return "invalid-sample";
    case ErrorCode::kUnknownProfile:
      return "unknown-profile";
    case ErrorCode::kTimeout:
      return "timeout";
    case ErrorCode::kNoSamples:
      return "no-samples";
    case ErrorCode::kRunError:
      return "run-error";
    case ErrorCode::kInvalidRun:
      return "invalid-run";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace rrsb
