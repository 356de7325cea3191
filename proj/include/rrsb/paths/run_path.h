#ifndef RRSB_PATHS_RUN_PATH_H_
#define RRSB_PATHS_RUN_PATH_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rrsb/clocksync/clocksync.h"
#include "rrsb/common/error.h"
#include "rrsb/media/ingest.h"
#include "rrsb/media/types.h"
#include "rrsb/netem/profile.h"
#include "rrsb/paths/player.h"
#include "rrsb/smt/connection.h"

namespace rrsb::paths {

enum class ProtocolPath { kRtpUdp, kRtpSmt, kMoqLite, kDash, kLlDash };

inline constexpr std::array<ProtocolPath, 5> kAllPaths = {
    ProtocolPath::kRtpUdp, ProtocolPath::kRtpSmt, ProtocolPath::kMoqLite, ProtocolPath::kDash,
    ProtocolPath::kLlDash};

// CLI names: rtp-udp, rtp-smt, moq, dash, lldash.
const char* PathName(ProtocolPath path);
// Raises kPrecondition for unknown names.
ProtocolPath ParsePath(const std::string& name);

struct PathConfig {
  media::EncoderConfig encoder;
  int width = 1920;
  int height = 1080;
  PlayerModelConfig player;
  double segment_duration_s = 2.0;
  double fragment_duration_s = 0.5;
  smt::SmtConfig smt;
  clocksync::HandshakeConfig sync;
  std::size_t rtp_mtu_payload = 1200;
  // Modeled stage costs on the sender.
  int64_t encode_cost_us = 3000;
  int64_t package_cost_us = 500;
  // Receiver clock minus sender clock; recovered by the clock sync phase.
  int64_t receiver_clock_offset_us = 250'000;
  media::IngestMode ingest = media::IngestMode::kInproc;
  // Loopback UDP sockets and the wall clock instead of virtual time.
  bool realtime = false;

  // Test hooks on the sender-to-receiver link. Outage times are relative to
  // the first capture.
  std::function<bool(ByteView, int64_t)> forward_drop_filter;
  std::vector<std::pair<int64_t, int64_t>> forward_outages;

  void Validate() const;
};

struct LatencySample {
  int64_t seq = 0;
  int64_t capture_ts_us = 0;  // sender clock
  int64_t display_ts_us = 0;  // receiver clock, corrected to the sender clock
  int64_t latency_us = 0;
  bool rebuffered = false;
};

// Sender clock times of one frame's pipeline stages.
struct StageTimes {
  int64_t capture_us = 0;
  int64_t encoded_us = 0;
  int64_t packaged_us = 0;
  int64_t sent_us = 0;  // handed to the transport or origin
};

struct RunResult {
  ProtocolPath path = ProtocolPath::kRtpUdp;
  std::string profile;
  uint64_t seed = 0;
  double duration_s = 0;
  std::vector<LatencySample> samples;  // sorted by seq
  int64_t sent = 0;
  int64_t lost = 0;
  int64_t skipped = 0;
  int64_t corrupted = 0;  // failed verification; included in lost
  clocksync::ClockEstimate clock;
  std::map<int64_t, StageTimes> stages;
  // DASH paths; times on the sender clock.
  std::vector<RebufferEvent> rebuffers;
  std::vector<SegmentFetch> fetches;
  // Sender-side SMT retransmissions (RtpSmt, MoqLite, DASH paths).
  std::vector<smt::RetransmitRecord> retransmissions;
  // RtpSmt: stream offset of each frame's first RTP packet.
  std::map<int64_t, uint64_t> stream_offsets;
  // MoqLite: stream carrying each group.
  std::map<int64_t, uint32_t> group_streams;
  int64_t stream_start_us = 0;  // sender clock of seq 0 capture
};

// Error raised by RunPath; the phase is one of clocksync, setup, stream.
class RunError : public Error {
 public:
  RunError(const std::string& phase, const std::string& message)
      : Error(ErrorCode::kRunError, phase + ": " + message), phase_(phase) {}
  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

// Clock sync handshake, path setup, `duration_s` of frames at the encoder
// rate, then a drain period. `seed` keys the encoder content and every link.
RunResult RunPath(ProtocolPath path, const netem::NetProfile& profile, const PathConfig& cfg,
                  double duration_s, uint64_t seed);

// "seq,capture_us,display_us,latency_us" rows in seq order.
std::string SamplesCsv(const RunResult& result);
nlohmann::json RunJson(const RunResult& result, const PathConfig& cfg);
// Writes samples.csv and run.json into `dir` (created if missing).
void WriteRunOutputs(const RunResult& result, const PathConfig& cfg, const std::string& dir);

}  // namespace rrsb::paths

#endif  // RRSB_PATHS_RUN_PATH_H_
