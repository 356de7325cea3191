#include "rrsb/clocksync/clocksync.h"

#include "rrsb/common/error.h"

namespace rrsb::clocksync {

ClockEstimate EstimateOffset(const ClockSample& s) {
  if (s.t3 < s.t2) throw Error(ErrorCode::kInvalidSample, "server send precedes receive");
  const int64_t rtt = (s.t4 - s.t1) - (s.t3 - s.t2);
  // A real exchange always takes time, so a zero round trip is as
  // implausible as a negative one.
  if (rtt <= 0 || s.t4 < s.t1) throw Error(ErrorCode::kInvalidSample, "non-positive round trip");
  return ClockEstimate{((s.t2 - s.t1) + (s.t3 - s.t4)) / 2, rtt, 1};
}

Bytes EncodeRequest(int64_t t1) {
  ByteWriter w;
  w.U8(kRequestType);
  w.I64(t1);
  return w.Take();
}

Bytes EncodeReply(int64_t t1, int64_t t2, int64_t t3) {
  ByteWriter w;
  w.U8(kReplyType);
  w.I64(t1);
  w.I64(t2);
  w.I64(t3);
  return w.Take();
}

std::optional<SyncMessage> ParseSyncMessage(ByteView data) {
  if (data.empty()) return std::nullopt;
  SyncMessage m;
  m.type = data[0];
  ByteReader r(data.subspan(1), 1);
  if (m.type == kRequestType && data.size() == 9) {
    m.t1 = r.I64();
    return m;
  }
  if (m.type == kReplyType && data.size() == 25) {
    m.t1 = r.I64();
    m.t2 = r.I64();
    m.t3 = r.I64();
    return m;
  }
  return std::nullopt;
}

bool SyncServer::OnDatagram(ByteView data) {
  auto m = ParseSyncMessage(data);
  if (!m || m->type != kRequestType) return false;
  const int64_t t2 = clock_.Now();
  send_(EncodeReply(m->t1, t2, clock_.Now()));
  return true;
}

SyncClient::SyncClient(sim::EventLoop* loop, sim::LocalClock clock, SendFn send,
                       HandshakeConfig cfg)
    : loop_(loop), clock_(clock), send_(std::move(send)), cfg_(cfg) {
  if (cfg_.rounds < 1) throw Error(ErrorCode::kPrecondition, "rounds must be >= 1");
}

SyncClient::~SyncClient() { loop_->Cancel(timer_); }

void SyncClient::Start(DoneFn done) {
  done_ = std::move(done);
  SendRound();
}

void SyncClient::SendRound() {
  if (round_ == cfg_.rounds) {
    Finish();
    return;
  }
  ++round_;
  const int64_t t1 = clock_.Now();
  outstanding_t1_ = t1;
  timer_ = loop_->PostAfter(cfg_.round_timeout_us, [this] {
    timer_ = sim::kNoTimer;
    outstanding_t1_.reset();
    SendRound();
  });
  send_(EncodeRequest(t1));
}

bool SyncClient::OnDatagram(ByteView data) {
  auto m = ParseSyncMessage(data);
  if (!m || m->type != kReplyType) return false;
  if (finished_ || !outstanding_t1_ || m->t1 != *outstanding_t1_) return true;  // stale reply
  samples_.push_back(ClockSample{m->t1, m->t2, m->t3, clock_.Now()});
  outstanding_t1_.reset();
  loop_->Cancel(timer_);
  timer_ = sim::kNoTimer;
  SendRound();
  return true;
}

void SyncClient::Finish() {
  finished_ = true;
  std::optional<ClockEstimate> best;
  int used = 0;
  for (const auto& s : samples_) {
    try {
      ClockEstimate e = EstimateOffset(s);
      ++used;
      if (!best || e.rtt_us < best->rtt_us) best = e;
    } catch (const Error&) {
    }
  }
  if (!best) {
    done_(nullptr, std::make_exception_ptr(
                       Error(ErrorCode::kTimeout, "no clock sync round completed")));
    return;
  }
  best->samples_used = used;
  done_(&*best, nullptr);
}

}  // namespace rrsb::clocksync
