#include "rrsb/paths/player.h"

#include <cmath>

#include "rrsb/common/error.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/media/types.h"

namespace rrsb::paths {

void PlayerModelConfig::Validate() const {
  if (buffer_target_s && !(*buffer_target_s > 0)) {
    throw Error(ErrorCode::kPrecondition, "buffer_target_s must be > 0");
  }
  if (poll_interval_ms <= 0) throw Error(ErrorCode::kPrecondition, "poll_interval_ms must be > 0");
  jitter.Validate();
}

double PlayerModelConfig::BufferTarget(bool low_latency) const {
  if (buffer_target_s) return *buffer_target_s;
  return low_latency ? 1.5 : 4.0;
}

DashPlayer::DashPlayer(sim::EventLoop* loop, smt::SmtConnection* conn,
                       const PlayerModelConfig& cfg, Clock origin_now, DisplayFn display)
    : loop_(loop),
      conn_(conn),
      cfg_(cfg),
      origin_now_(std::move(origin_now)),
      display_(std::move(display)) {
  cfg_.Validate();
}

DashPlayer::~DashPlayer() { loop_->Cancel(timer_); }

void DashPlayer::Start(std::function<void()> on_ready, ErrorFn on_error) {
  on_ready_ = std::move(on_ready);
  on_error_ = std::move(on_error);
  Request(Target::kMpd, 0);
}

void DashPlayer::Stop() {
  stopped_ = true;
  loop_->Cancel(timer_);
  timer_ = sim::kNoTimer;
}

void DashPlayer::Fail(const std::string& message) {
  Stop();
  if (on_error_) on_error_(message);
}

void DashPlayer::Request(Target target, int64_t segment) {
  std::string path = target == Target::kMpd    ? dash::kMpdPath
                     : target == Target::kInit ? dash::kInitPath
                                               : dash::SegmentPath(segment);
  const uint32_t id = conn_->OpenStream();
  Pending& p = pending_[id];
  p.target = target;
  p.segment = segment;
  if (target == Target::kSegment) {
    segment_outstanding_ = true;
    p.fetch_index = fetches_.size();
    fetches_.push_back({segment, 0, loop_->Now(), 0});
  }
  conn_->StreamSend(id, http::SerializeRequest({"GET", path}), true);
}

void DashPlayer::OnStreamData(uint32_t stream_id, ByteView data) {
  auto it = pending_.find(stream_id);
  if (it == pending_.end()) return;
  Pending& p = it->second;
  std::vector<http::ResponseEvent> events;
  try {
    events = p.parser.Feed(data);
  } catch (const Error& e) {
    pending_.erase(it);
    Fail(std::string("bad response: ") + e.what());
    return;
  }
  for (auto& ev : events) {
    switch (ev.kind) {
      case http::ResponseEvent::Kind::kHead:
        p.status = ev.status;
        break;
      case http::ResponseEvent::Kind::kBody:
        if (p.target == Target::kSegment && mpd_.low_latency && p.status == 200) {
          // One chunk is one fragment.
          isobmff::ParsedFragment frag;
          try {
            frag = isobmff::ParseFragment(ev.data);
          } catch (const Error& e) {
            pending_.erase(it);
            Fail(std::string("bad fragment: ") + e.what());
            return;
          }
          AcceptFragment(std::move(frag), p.segment, p.chunks++);
        } else {
          p.body.insert(p.body.end(), ev.data.begin(), ev.data.end());
        }
        break;
      case http::ResponseEvent::Kind::kDone:
        OnDone(p);
        pending_.erase(stream_id);
        return;
    }
  }
}

void DashPlayer::OnDone(Pending& p) {
  switch (p.target) {
    case Target::kMpd:
      if (p.status != 200) return Fail("MPD fetch returned " + std::to_string(p.status));
      try {
        mpd_ = dash::ConfigFromModel(
            dash::ParseMpd(std::string_view(reinterpret_cast<const char*>(p.body.data()),
                                            p.body.size())));
      } catch (const Error& e) {
        return Fail(e.what());
      }
      have_mpd_ = true;
      Request(Target::kInit, 0);
      return;
    case Target::kInit:
      if (p.status != 200) return Fail("init fetch returned " + std::to_string(p.status));
      ready_ = true;
      if (on_ready_) on_ready_();
      if (!stopped_) Tick();
      return;
    case Target::kSegment: {
      segment_outstanding_ = false;
      fetches_[p.fetch_index].status = p.status;
      fetches_[p.fetch_index].completed_us = loop_->Now();
      if (p.status != 200) return;  // retried on a later tick
      if (!mpd_.low_latency) {
        try {
          for (auto& frag : isobmff::ParseSegment(p.body)) {
            AcceptFragment(std::move(frag), p.segment, 0);
          }
        } catch (const Error& e) {
          return Fail(e.what());
        }
      }
      next_segment_ = p.segment + 1;
      // The next LL segment opens as this one closes.
      if (mpd_.low_latency && !stopped_) Request(Target::kSegment, next_segment_);
      return;
    }
  }
}

void DashPlayer::Tick() {
  timer_ = sim::kNoTimer;
  if (stopped_) return;
  if (!joined_) Join();
  if (!segment_outstanding_ && origin_now_() >= dash::AvailabilityTime(next_segment_, mpd_)) {
    Request(Target::kSegment, next_segment_);
  }
  timer_ = loop_->PostAfter(cfg_.poll_interval_ms * 1000, [this] { Tick(); });
}

void DashPlayer::Join() {
  joined_ = true;
  const int64_t now = origin_now_();
  const int64_t since = now - mpd_.availability_start_time_us;
  const int64_t seg = mpd_.segment_duration_us();
  if (!mpd_.low_latency) {
    // Newest complete segment: AST + N * seg <= now.
    start_ = {since >= seg ? since / seg : 1, 0};
  } else {
    const int64_t frag = mpd_.fragment_duration_us();
    // Fragments completed so far, counted from the stream start.
    const int64_t done = since >= frag ? since / frag : 1;
    const int64_t last = done - 1;
    start_ = {last / mpd_.fragments_per_segment() + 1,
              static_cast<int>(last % mpd_.fragments_per_segment())};
  }
  next_segment_ = start_.first;
}

void DashPlayer::AcceptFragment(isobmff::ParsedFragment frag, int64_t segment, int index) {
  const std::pair<int64_t, int> unit{segment, index};
  if (unit < start_) return;
  int64_t pts = frag.base_dts_90k;
  for (std::size_t i = 0; i < frag.payloads.size(); ++i) {
    Frame f{pts, std::move(frag.payloads[i])};
    pts += frag.durations[i];
    if (playout_start_) {
      Display(std::move(f));
      continue;
    }
    if (unit > start_) ++frames_beyond_start_;
    buffered_.push_back(std::move(f));
  }
  if (!playout_start_ && !buffered_.empty()) {
    const double target = cfg_.BufferTarget(mpd_.low_latency);
    if (frames_beyond_start_ >= std::llround(target * mpd_.fps)) {
      playout_start_ = loop_->Now();
      base_pts_ = buffered_.front().pts_90k;
      for (auto& f : buffered_) Display(std::move(f));
      buffered_.clear();
    }
  }
}

void DashPlayer::Display(Frame&& frame) {
  const int64_t media_us = (frame.pts_90k - base_pts_) * 1'000'000 / media::kTimescale90k;
  int64_t at = *playout_start_ + shift_us_ + media_us;
  const int64_t now = loop_->Now();
  if (at < now) {
    rebuffers_.push_back({at, now - at});
    shift_us_ += now - at;
    rebuffered_ = true;
    at = now;
  }
  display_({frame.pts_90k, std::move(frame.payload), at, rebuffered_});
}

}  // namespace rrsb::paths
