#ifndef RRSB_HTTP_HTTP_H_
#define RRSB_HTTP_HTTP_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"

namespace rrsb::http {

// HTTP/1.1 subset: GET requests, 200/404 responses with either
// Content-Length or chunked transfer coding.

struct Request {
  std::string method = "GET";
  std::string path;

  bool operator==(const Request&) const = default;
};

Bytes SerializeRequest(const Request& req);

// Incremental request parser. Raises MalformedError on a bad request line.
class RequestParser {
 public:
  std::vector<Request> Feed(ByteView data);

 private:
  std::string buffer_;
};

const char* ReasonPhrase(int status);

// Full response with Content-Length.
Bytes SerializeResponse(int status, ByteView body, const std::string& content_type);
// Head of a chunked response; the body follows as EncodeChunk() pieces.
Bytes SerializeChunkedHead(int status, const std::string& content_type);
// An empty `data` encodes the terminating chunk.
Bytes EncodeChunk(ByteView data);

struct ResponseEvent {
  enum class Kind { kHead, kBody, kDone };
  Kind kind = Kind::kHead;
  int status = 0;         // kHead
  bool chunked = false;   // kHead
  Bytes data;             // kBody: one whole chunk, or the bytes that arrived
};

// Incremental response parser. Chunked bodies are reported one complete chunk
// per kBody event; Content-Length bodies as they arrive.
class ResponseParser {
 public:
  // Raises MalformedError on a bad status line, header or chunk size.
  std::vector<ResponseEvent> Feed(ByteView data);
  bool done() const { return state_ == State::kDone; }

 private:
  enum class State { kHead, kBody, kChunkSize, kChunkData, kChunkEnd, kTrailer, kDone };

  State state_ = State::kHead;
  Bytes buffer_;
  std::size_t consumed_ = 0;  // total bytes consumed, for error offsets
  uint64_t remaining_ = 0;
};

}  // namespace rrsb::http

#endif  // RRSB_HTTP_HTTP_H_
