#ifndef RRSB_RTP_JITTER_BUFFER_H_
#define RRSB_RTP_JITTER_BUFFER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rrsb/media/types.h"

namespace rrsb::rtp {

struct JitterBufferConfig {
  int64_t target_delay_ms = 50;
  // How far past its ready time an AU may still be handed out.
  int64_t max_late_ms = 200;

  void Validate() const;
};

struct LateEvent {
  int64_t seq = 0;
  int64_t pts_90k = 0;
  int64_t arrival_us = 0;
  // For out-of-order arrivals: arrival minus the time the newer AU was popped.
  // For stale pops: pop time minus ready time.
  int64_t lateness_us = 0;
};

// Fixed-delay playout buffer. An AU becomes ready at first-fragment arrival
// plus the target delay and is released in pts order.
class JitterBuffer {
 public:
  explicit JitterBuffer(JitterBufferConfig config = {});

  // Returns false when the AU was dropped as late.
  bool Insert(media::AccessUnit au, int64_t first_arrival_us);
  std::vector<media::AccessUnit> PopReady(int64_t now_us);
  std::optional<int64_t> NextReadyTime() const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<LateEvent>& late_events() const { return late_; }
  const JitterBufferConfig& config() const { return config_; }

 private:
  struct Entry {
    media::AccessUnit au;
    int64_t arrival_us;
    int64_t ready_us;
  };

  JitterBufferConfig config_;
  std::multimap<int64_t, Entry> entries_;  // keyed by pts
  std::optional<int64_t> last_popped_pts_;
  int64_t last_pop_us_ = 0;
  std::vector<LateEvent> late_;
};

}  // namespace rrsb::rtp

#endif  // RRSB_RTP_JITTER_BUFFER_H_
