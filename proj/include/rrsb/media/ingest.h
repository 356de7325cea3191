#ifndef RRSB_MEDIA_INGEST_H_
#define RRSB_MEDIA_INGEST_H_

#include <cstdint>
#include <cstdio>
#include <string>

#include "rrsb/common/error.h"
#include "rrsb/media/types.h"

namespace rrsb::media {

// Receives encoded access units at the end of an ingest pipeline.
class AuSink {
 public:
  virtual ~AuSink() = default;
  virtual void Consume(const AccessUnit& au) = 0;
};

// Writes concatenated SerializeAu records to a file.
class FileSink : public AuSink {
 public:
  explicit FileSink(const std::string& path);
  ~FileSink() override;
  FileSink(const FileSink&) = delete;
  FileSink& operator=(const FileSink&) = delete;

  void Consume(const AccessUnit& au) override;
  void Flush();
  int64_t frames() const { return frames_; }
  int64_t bytes() const { return bytes_; }

 private:
  std::FILE* file_;
  int64_t frames_ = 0;
  int64_t bytes_ = 0;
};

// Counts access units and runs DecodeVerify on each.
class VerifyingSink : public AuSink {
 public:
  explicit VerifyingSink(uint64_t seed) : seed_(seed) {}
  void Consume(const AccessUnit& au) override;

  int64_t frames() const { return frames_; }
  int64_t verified() const { return verified_; }
  int64_t last_seq() const { return last_seq_; }

 private:
  uint64_t seed_;
  int64_t frames_ = 0;
  int64_t verified_ = 0;
  int64_t last_seq_ = -1;
};

enum class IngestMode { kInproc, kPipe };

const char* IngestModeName(IngestMode mode);
IngestMode ParseIngestMode(const std::string& name);

struct IngestOptions {
  VideoConfig video;
  EncoderConfig encoder;
  int64_t n_frames = 600;
  std::size_t queue_capacity = 4;
  // Test hook: the source stops (and closes its end) after this many frames.
  int64_t source_stops_after = -1;
};

struct IngestResult {
  int64_t frames = 0;
  double seconds = 0;
  double fps = 0;
};

// Thrown when the source side goes away before n_frames reached the sink.
class IngestError : public Error {
 public:
  IngestError(const std::string& message, int64_t frames_completed)
      : Error(ErrorCode::kTransport,
              message + " after " + std::to_string(frames_completed) + " frames"),
        frames_completed_(frames_completed) {}
  int64_t frames_completed() const { return frames_completed_; }

 private:
  int64_t frames_completed_;
};

// source -> queue -> encoder -> queue -> sink, one thread per stage. Frames
// are handed over by move; nothing is copied between stages.
IngestResult IngestInproc(const IngestOptions& options, AuSink& sink);

// source -> OS pipe (raw frame records) -> encoder -> OS pipe (AU records)
// -> sink. Every frame crosses the kernel twice.
IngestResult IngestPipe(const IngestOptions& options, AuSink& sink);

IngestResult Ingest(IngestMode mode, const IngestOptions& options, AuSink& sink);

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_INGEST_H_
