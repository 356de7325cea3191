#include "rrsb/rtp/jitter_buffer.h"

#include "rrsb/common/error.h"

namespace rrsb::rtp {

void JitterBufferConfig::Validate() const {
  if (target_delay_ms < 0) throw Error(ErrorCode::kPrecondition, "target_delay_ms < 0");
  if (max_late_ms < 0) throw Error(ErrorCode::kPrecondition, "max_late_ms < 0");
}

JitterBuffer::JitterBuffer(JitterBufferConfig config) : config_(config) {
  config_.Validate();
}

bool JitterBuffer::Insert(media::AccessUnit au, int64_t first_arrival_us) {
  if (last_popped_pts_ && au.pts_90k <= *last_popped_pts_) {
    late_.push_back(
        LateEvent{au.seq, au.pts_90k, first_arrival_us, first_arrival_us - last_pop_us_});
    return false;
  }
  const int64_t ready = first_arrival_us + config_.target_delay_ms * 1000;
  const int64_t pts = au.pts_90k;
  entries_.emplace(pts, Entry{std::move(au), first_arrival_us, ready});
  return true;
}

std::vector<media::AccessUnit> JitterBuffer::PopReady(int64_t now_us) {
  std::vector<media::AccessUnit> out;
  while (!entries_.empty()) {
    auto head = entries_.begin();
    if (head->second.ready_us > now_us) break;
    Entry e = std::move(head->second);
    entries_.erase(head);
    last_popped_pts_ = e.au.pts_90k;
    last_pop_us_ = now_us;
    if (now_us - e.ready_us > config_.max_late_ms * 1000) {
      late_.push_back(LateEvent{e.au.seq, e.au.pts_90k, e.arrival_us, now_us - e.ready_us});
      continue;
    }
    out.push_back(std::move(e.au));
  }
  return out;
}

std::optional<int64_t> JitterBuffer::NextReadyTime() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.begin()->second.ready_us;
}

}  // namespace rrsb::rtp
