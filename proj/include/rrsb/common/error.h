#ifndef RRSB_COMMON_ERROR_H_
#define RRSB_COMMON_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rrsb {

enum class ErrorCode {
  kMalformed,
  kPrecondition,
  kOrdering,
  kTransport,
  kProtocol,
  kInvalidSample,
  kUnknownProfile,
  kTimeout,
  kNoSamples,
  kRunError,
  kInvalidRun,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// Base error for the library. Carries a machine-checkable code; subclasses add
// context such as byte offsets or completed-frame counts.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure at a known position in the input.
class MalformedError : public Error {
 public:
  MalformedError(const std::string& message, std::size_t offset)
      : Error(ErrorCode::kMalformed,
              message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace rrsb

#endif  // RRSB_COMMON_ERROR_H_
