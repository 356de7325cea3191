#ifndef RRSB_PATHS_PLAYER_H_
#define RRSB_PATHS_PLAYER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/dash/mpd.h"
#include "rrsb/http/http.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/rtp/jitter_buffer.h"
#include "rrsb/sim/event_loop.h"
#include "rrsb/smt/connection.h"

namespace rrsb::paths {

struct PlayerModelConfig {
  // Media that must be buffered beyond the starting chunk before playout.
  // Unset: 4.0 s for DASH, 1.5 s for LL-DASH.
  std::optional<double> buffer_target_s;
  int64_t poll_interval_ms = 100;
  rtp::JitterBufferConfig jitter;  // RTP and MoQ paths

  void Validate() const;
  double BufferTarget(bool low_latency) const;
};

struct RebufferEvent {
  int64_t at_us = 0;        // when playout ran dry
  int64_t duration_us = 0;  // until the missing data arrived
};

struct PlayedFrame {
  int64_t pts_90k = 0;
  Bytes payload;
  int64_t display_us = 0;
  // Displayed after a rebuffer, so its latency includes stall time.
  bool rebuffered = false;
};

struct SegmentFetch {
  int64_t segment = 0;
  int status = 0;
  int64_t requested_us = 0;
  int64_t completed_us = 0;
};

// Live DASH client over SMT: fetches the MPD and init segment, joins at the
// newest complete chunk (segment, or fragment for LL-DASH), and starts playout
// once the buffer target of later media has arrived. Playout then runs at 1x;
// a frame that arrives after its display time stalls playout (rebuffer).
class DashPlayer {
 public:
  using Clock = std::function<int64_t()>;  // estimate of the origin clock
  using DisplayFn = std::function<void(PlayedFrame&&)>;
  using ErrorFn = std::function<void(const std::string&)>;

  DashPlayer(sim::EventLoop* loop, smt::SmtConnection* conn, const PlayerModelConfig& cfg,
             Clock origin_now, DisplayFn display);
  ~DashPlayer();
  DashPlayer(const DashPlayer&) = delete;
  DashPlayer& operator=(const DashPlayer&) = delete;

  // Fetches the MPD and init segment; `on_ready` runs once both arrived.
  void Start(std::function<void()> on_ready, ErrorFn on_error);
  void OnStreamData(uint32_t stream_id, ByteView data);
  void Stop();

  bool ready() const { return ready_; }
  const dash::MpdConfig& mpd() const { return mpd_; }
  std::optional<int64_t> playout_start_us() const { return playout_start_; }
  // Chunk playout started from: (segment, fragment index; 0 for DASH).
  std::pair<int64_t, int> start_chunk() const { return start_; }
  const std::vector<RebufferEvent>& rebuffers() const { return rebuffers_; }
  const std::vector<SegmentFetch>& fetches() const { return fetches_; }

 private:
  enum class Target { kMpd, kInit, kSegment };
  struct Pending {
    Target target = Target::kMpd;
    int64_t segment = 0;
    http::ResponseParser parser;
    int status = 0;
    Bytes body;
    int chunks = 0;
    std::size_t fetch_index = 0;
  };
  struct Frame {
    int64_t pts_90k;
    Bytes payload;
  };

  void Request(Target target, int64_t segment);
  void OnDone(Pending& p);
  void Fail(const std::string& message);
  void Tick();
  void Join();
  void AcceptFragment(isobmff::ParsedFragment frag, int64_t segment, int index);
  void Display(Frame&& frame);

  sim::EventLoop* loop_;
  smt::SmtConnection* conn_;
  PlayerModelConfig cfg_;
  Clock origin_now_;
  DisplayFn display_;
  std::function<void()> on_ready_;
  ErrorFn on_error_;

  dash::MpdConfig mpd_;
  bool have_mpd_ = false;
  bool ready_ = false;
  bool stopped_ = false;
  bool joined_ = false;
  sim::TimerId timer_ = sim::kNoTimer;
  std::map<uint32_t, Pending> pending_;
  bool segment_outstanding_ = false;
  int64_t next_segment_ = 1;
  std::pair<int64_t, int> start_{1, 0};

  std::vector<Frame> buffered_;
  int64_t frames_beyond_start_ = 0;
  std::optional<int64_t> playout_start_;
  int64_t base_pts_ = 0;
  int64_t shift_us_ = 0;
  bool rebuffered_ = false;
  std::vector<RebufferEvent> rebuffers_;
  std::vector<SegmentFetch> fetches_;
};

}  // namespace rrsb::paths

#endif  // RRSB_PATHS_PLAYER_H_
