#ifndef RRSB_PATHS_ORIGIN_H_
#define RRSB_PATHS_ORIGIN_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/dash/mpd.h"
#include "rrsb/http/http.h"
#include "rrsb/paths/packager.h"
#include "rrsb/smt/connection.h"

namespace rrsb::paths {

struct OriginLogEntry {
  std::string path;
  int status = 0;
  int64_t at_us = 0;  // origin clock
};

// Live HTTP origin answering one GET per stream on an SMT connection.
// DASH segments are 404 until complete. LL-DASH segments are served with
// chunked transfer from their availability time on, one fragment per chunk.
class LiveOrigin {
 public:
  using Clock = std::function<int64_t()>;

  LiveOrigin(smt::SmtConnection* conn, const dash::MpdConfig& cfg, Bytes init_segment,
             Clock now);

  void OnStreamData(uint32_t stream_id, ByteView data);
  void AddFragment(const PackagedFragment& fragment);
  // No segment after the last one added will ever exist.
  void Finish();

  const std::vector<OriginLogEntry>& log() const { return log_; }

 private:
  struct Segment {
    std::vector<Bytes> fragments;
    bool complete = false;
  };
  struct LiveResponse {
    int64_t segment;
    std::size_t fragments_sent;
  };

  void Handle(uint32_t stream_id, const http::Request& req);
  void Reply(uint32_t stream_id, int status, ByteView body, const std::string& type);
  void Pump(uint32_t stream_id, LiveResponse& live);

  smt::SmtConnection* conn_;
  dash::MpdConfig cfg_;
  std::string mpd_;
  Bytes init_;
  Clock now_;
  std::map<int64_t, Segment> segments_;
  std::optional<int64_t> last_segment_;
  std::map<uint32_t, http::RequestParser> parsers_;
  std::map<uint32_t, LiveResponse> live_;
  std::vector<OriginLogEntry> log_;
};

}  // namespace rrsb::paths

#endif  // RRSB_PATHS_ORIGIN_H_
