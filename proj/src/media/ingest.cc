#include "rrsb/media/ingest.h"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>

#include "rrsb/media/au_header.h"
#include "rrsb/media/au_record.h"
#include "rrsb/media/bounded_queue.h"
#include "rrsb/media/encoder.h"

namespace rrsb::media {

FileSink::FileSink(const std::string& path) : file_(std::fopen(path.c_str(), "wb")) {
  if (!file_) throw Error(ErrorCode::kIo, "cannot open " + path + ": " + std::strerror(errno));
}

FileSink::~FileSink() {
  if (file_) std::fclose(file_);
}

void FileSink::Consume(const AccessUnit& au) {
  Bytes record = SerializeAu(au);
  if (std::fwrite(record.data(), 1, record.size(), file_) != record.size()) {
    throw Error(ErrorCode::kIo, "short write to file sink");
  }
  ++frames_;
  bytes_ += static_cast<int64_t>(record.size());
}

void FileSink::Flush() {
  if (std::fflush(file_) != 0) throw Error(ErrorCode::kIo, "flush failed");
}

void VerifyingSink::Consume(const AccessUnit& au) {
  ++frames_;
  last_seq_ = au.seq;
  DecodedAu decoded = DecodeVerify(au.payload, seed_);
  if (decoded.verified && decoded.seq == static_cast<uint32_t>(au.seq) &&
      decoded.capture_ts_us == au.capture_ts_us) {
    ++verified_;
  }
}

const char* IngestModeName(IngestMode mode) {
  return mode == IngestMode::kInproc ? "inproc" : "pipe";
}

IngestMode ParseIngestMode(const std::string& name) {
  if (name == "inproc") return IngestMode::kInproc;
  if (name == "pipe") return IngestMode::kPipe;
  throw Error(ErrorCode::kPrecondition, "unknown ingest mode '" + name + "'");
}

namespace {

int64_t WallClockUs() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

using SteadyClock = std::chrono::steady_clock;

IngestResult Finish(int64_t frames, SteadyClock::time_point start) {
  IngestResult result;
  result.frames = frames;
  result.seconds = std::chrono::duration<double>(SteadyClock::now() - start).count();
  result.fps = result.seconds > 0 ? static_cast<double>(frames) / result.seconds : 0;
  return result;
}

int64_t SourceFrameCount(const IngestOptions& options) {
  if (options.source_stops_after >= 0) {
    return std::min(options.source_stops_after, options.n_frames);
  }
  return options.n_frames;
}

// First exception raised by any stage thread.
class FirstError {
 public:
  void Capture() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!error_) error_ = std::current_exception();
  }
  void RethrowIfAny() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

class Pipe {
 public:
  Pipe() {
    if (::pipe(fds_) != 0) throw Error(ErrorCode::kIo, "pipe() failed");
    // Larger pipe buffers cut syscall counts; failure is harmless.
    ::fcntl(fds_[1], F_SETPIPE_SZ, 1 << 20);
  }
  ~Pipe() {
    CloseRead();
    CloseWrite();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;

  void CloseRead() { Close(&fds_[0]); }
  void CloseWrite() { Close(&fds_[1]); }

  // Returns false if the reader went away.
  bool WriteAll(ByteView data) {
    std::size_t done = 0;
    while (done < data.size()) {
      ssize_t n = ::write(fds_[1], data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE) return false;
        throw Error(ErrorCode::kIo, std::string("pipe write: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    return true;
  }

  // Reads exactly out.size() bytes. Returns false on EOF before any byte; a
  // partial record followed by EOF is a transport error.
  bool ReadExact(std::span<uint8_t> out) {
    std::size_t done = 0;
    while (done < out.size()) {
      ssize_t n = ::read(fds_[0], out.data() + done, out.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kIo, std::string("pipe read: ") + std::strerror(errno));
      }
      if (n == 0) {
        if (done == 0) return false;
        throw Error(ErrorCode::kTransport, "pipe closed mid-record");
      }
      done += static_cast<std::size_t>(n);
    }
    return true;
  }

  // Reads one length-prefixed record (length field included in the result).
  bool ReadRecord(Bytes* record) {
    uint8_t len_bytes[4];
    if (!ReadExact(len_bytes)) return false;
    const uint32_t len = ReadU32At(len_bytes, 0);
    record->resize(4 + static_cast<std::size_t>(len));
    std::memcpy(record->data(), len_bytes, 4);
    if (!ReadExact(std::span<uint8_t>(*record).subspan(4))) {
      throw Error(ErrorCode::kTransport, "pipe closed mid-record");
    }
    return true;
  }

 private:
  static void Close(int* fd) {
    if (*fd >= 0) {
      ::close(*fd);
      *fd = -1;
    }
  }
  int fds_[2] = {-1, -1};
};

void IgnoreSigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void CheckOptions(const IngestOptions& options) {
  options.video.Validate();
  options.encoder.Validate();
  if (options.n_frames < 1) throw Error(ErrorCode::kPrecondition, "n_frames must be >= 1");
  if (options.queue_capacity < 1) {
    throw Error(ErrorCode::kPrecondition, "queue_capacity must be >= 1");
  }
}

}  // namespace

IngestResult IngestInproc(const IngestOptions& options, AuSink& sink) {
  CheckOptions(options);
  BoundedQueue<RawFrame> raw_queue(options.queue_capacity);
  BoundedQueue<AccessUnit> au_queue(options.queue_capacity);
  FirstError errors;
  const int64_t source_frames = SourceFrameCount(options);
  const auto start = SteadyClock::now();

  std::thread source([&] {
    try {
      for (int64_t seq = 0; seq < source_frames; ++seq) {
        if (!raw_queue.Push(SynthesizeFrame(seq, options.video, WallClockUs()))) break;
      }
    } catch (...) {
      errors.Capture();
    }
    raw_queue.Close();
  });
  std::thread encoder([&] {
    try {
      MockEncoder enc(options.encoder, options.video.seed);
      while (auto frame = raw_queue.Pop()) {
        if (!au_queue.Push(enc.Encode(*frame))) break;
      }
    } catch (...) {
      errors.Capture();
      raw_queue.Close();
    }
    au_queue.Close();
  });

  int64_t delivered = 0;
  try {
    while (auto au = au_queue.Pop()) {
      sink.Consume(*au);
      ++delivered;
    }
  } catch (...) {
    errors.Capture();
    raw_queue.Close();
    au_queue.Close();
  }
  IngestResult result = Finish(delivered, start);
  source.join();
  encoder.join();
  errors.RethrowIfAny();
  if (delivered < options.n_frames) throw IngestError("source queue closed early", delivered);
  return result;
}

IngestResult IngestPipe(const IngestOptions& options, AuSink& sink) {
  CheckOptions(options);
  IgnoreSigpipe();
  Pipe raw_pipe;
  Pipe au_pipe;
  FirstError errors;
  const int64_t source_frames = SourceFrameCount(options);
  const auto start = SteadyClock::now();

  std::thread source([&] {
    try {
      for (int64_t seq = 0; seq < source_frames; ++seq) {
        Bytes record =
            SerializeRawFrame(SynthesizeFrame(seq, options.video, WallClockUs()));
        if (!raw_pipe.WriteAll(record)) break;
      }
    } catch (...) {
      errors.Capture();
    }
    raw_pipe.CloseWrite();
  });
  std::thread encoder([&] {
    try {
      MockEncoder enc(options.encoder, options.video.seed);
      Bytes record;
      while (raw_pipe.ReadRecord(&record)) {
        AccessUnit au = enc.Encode(DeserializeRawFrame(record));
        if (!au_pipe.WriteAll(SerializeAu(au))) break;
      }
    } catch (...) {
      errors.Capture();
    }
    raw_pipe.CloseRead();
    au_pipe.CloseWrite();
  });

  int64_t delivered = 0;
  try {
    Bytes record;
    while (au_pipe.ReadRecord(&record)) {
      sink.Consume(DeserializeAu(record));
      ++delivered;
    }
  } catch (...) {
    errors.Capture();
  }
  IngestResult result = Finish(delivered, start);
  au_pipe.CloseRead();
  source.join();
  encoder.join();
  errors.RethrowIfAny();
  if (delivered < options.n_frames) throw IngestError("pipe closed early", delivered);
  return result;
}

IngestResult Ingest(IngestMode mode, const IngestOptions& options, AuSink& sink) {
  return mode == IngestMode::kInproc ? IngestInproc(options, sink)
                                     : IngestPipe(options, sink);
}

}  // namespace rrsb::media
