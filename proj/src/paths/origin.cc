#include "rrsb/paths/origin.h"

#include "rrsb/common/error.h"

namespace rrsb::paths {

LiveOrigin::LiveOrigin(smt::SmtConnection* conn, const dash::MpdConfig& cfg, Bytes init_segment,
                       Clock now)
    : conn_(conn),
      cfg_(cfg),
      mpd_(dash::RenderMpd(cfg)),
      init_(std::move(init_segment)),
      now_(std::move(now)) {}

void LiveOrigin::OnStreamData(uint32_t stream_id, ByteView data) {
  for (const auto& req : parsers_[stream_id].Feed(data)) Handle(stream_id, req);
}

void LiveOrigin::Reply(uint32_t stream_id, int status, ByteView body, const std::string& type) {
  conn_->StreamSend(stream_id, http::SerializeResponse(status, body, type), true);
}

void LiveOrigin::Handle(uint32_t stream_id, const http::Request& req) {
  int status = 404;
  if (req.method != "GET") {
    Reply(stream_id, 404, {}, "text/plain");
  } else if (req.path == dash::kMpdPath) {
    status = 200;
    Reply(stream_id, 200, ByteView(reinterpret_cast<const uint8_t*>(mpd_.data()), mpd_.size()),
          "application/dash+xml");
  } else if (req.path == dash::kInitPath) {
    status = 200;
    Reply(stream_id, 200, init_, "video/mp4");
  } else if (auto n = dash::ParseSegmentPath(req.path)) {
    auto it = segments_.find(*n);
    const bool complete = it != segments_.end() && it->second.complete;
    if (!cfg_.low_latency) {
      if (complete) {
        status = 200;
        Bytes body;
        for (const auto& f : it->second.fragments) body.insert(body.end(), f.begin(), f.end());
        Reply(stream_id, 200, body, "video/mp4");
      }
    } else {
      const bool started = now_() >= dash::AvailabilityTime(*n, cfg_);
      const bool exists = !last_segment_ || *n <= *last_segment_;
      if (complete || (started && exists)) {
        status = 200;
        conn_->StreamSend(stream_id, http::SerializeChunkedHead(200, "video/mp4"));
        auto [live, inserted] = live_.insert_or_assign(stream_id, LiveResponse{*n, 0});
        Pump(stream_id, live->second);
      }
    }
    if (status == 404) Reply(stream_id, 404, {}, "text/plain");
  } else {
    Reply(stream_id, 404, {}, "text/plain");
  }
  log_.push_back({req.path, status, now_()});
}

void LiveOrigin::Pump(uint32_t stream_id, LiveResponse& live) {
  auto it = segments_.find(live.segment);
  const bool gone = last_segment_ && live.segment > *last_segment_;
  if (it != segments_.end()) {
    const auto& frags = it->second.fragments;
    for (; live.fragments_sent < frags.size(); ++live.fragments_sent) {
      conn_->StreamSend(stream_id, http::EncodeChunk(frags[live.fragments_sent]));
    }
  }
  if ((it != segments_.end() && it->second.complete) || gone) {
    conn_->StreamSend(stream_id, http::EncodeChunk({}), true);
    live_.erase(stream_id);
  }
}

void LiveOrigin::AddFragment(const PackagedFragment& fragment) {
  Segment& seg = segments_[fragment.segment_number];
  if (seg.complete) {
    throw Error(ErrorCode::kOrdering,
                "segment " + std::to_string(fragment.segment_number) + " is already complete");
  }
  seg.fragments.push_back(fragment.bytes);
  seg.complete = fragment.segment_complete;
  for (auto it = live_.begin(); it != live_.end();) {
    const uint32_t id = it->first;
    LiveResponse& live = it->second;
    ++it;
    if (live.segment == fragment.segment_number) Pump(id, live);
  }
}

void LiveOrigin::Finish() {
  last_segment_ = segments_.empty() ? 0 : segments_.rbegin()->first;
  for (auto& [n, seg] : segments_) seg.complete = true;
  for (auto it = live_.begin(); it != live_.end();) {
    const uint32_t id = it->first;
    LiveResponse& live = it->second;
    ++it;
    Pump(id, live);
  }
}

}  // namespace rrsb::paths
