#include "rrsb/smt/connection.h"

#include <algorithm>

#include "rrsb/common/error.h"

namespace rrsb::smt {
namespace {

constexpr uint32_t kServerStreamBit = 0x80000000u;

}  // namespace

SmtConnection::SmtConnection(sim::EventLoop* loop, netem::DatagramChannel* tx, SmtConfig cfg)
    : loop_(loop), tx_(tx), cfg_(cfg) {
  if (cfg_.mtu_payload == 0 || cfg_.mtu_payload > 0xffff) {
    throw Error(ErrorCode::kPrecondition, "mtu_payload out of range");
  }
}

SmtConnection::~SmtConnection() {
  for (auto& [id, s] : send_) loop_->Cancel(s.timer);
}

void SmtConnection::Attach(netem::DatagramChannel* rx,
                           std::function<void(SmtEvent&&)> handler) {
  rx->SetReceiver([this, handler = std::move(handler)](Bytes data, int64_t arrival_us) {
    for (auto& e : OnDatagram(data, arrival_us)) handler(std::move(e));
  });
}

uint32_t SmtConnection::OpenStream() {
  if (next_stream_id_ >= kServerStreamBit) {
    throw Error(ErrorCode::kProtocol, "stream ids exhausted");
  }
  const uint32_t id = next_stream_id_++ | (cfg_.server ? kServerStreamBit : 0);
  send_.emplace(id, SendStream{});
  return id;
}

SmtConnection::SendStream& SmtConnection::SendSide(uint32_t stream_id) {
  auto it = send_.find(stream_id);
  if (it != send_.end()) return it->second;
  // Streams opened by the peer are bidirectional.
  if (recv_.count(stream_id)) return send_[stream_id];
  throw Error(ErrorCode::kProtocol, "stream " + std::to_string(stream_id) + " is not open");
}

void SmtConnection::StreamSend(uint32_t stream_id, ByteView data, bool fin) {
  SendStream& s = SendSide(stream_id);
  if (s.fin_sent) {
    throw Error(ErrorCode::kProtocol,
                "send after FIN on stream " + std::to_string(stream_id));
  }
  std::size_t pos = 0;
  do {
    const std::size_t n = std::min(cfg_.mtu_payload, data.size() - pos);
    const bool last = pos + n == data.size();
    Chunk c{s.next_offset, Bytes(data.begin() + pos, data.begin() + pos + n), fin && last, 0, 0};
    s.next_offset += n;
    pos += n;
    s.unacked.push_back(std::move(c));
    Transmit(stream_id, s.unacked.back());
  } while (pos < data.size());
  if (fin) s.fin_sent = true;
  Rearm(stream_id);
}

void SmtConnection::Transmit(uint32_t stream_id, Chunk& chunk) {
  Frame f;
  f.type = FrameType::kStream;
  f.stream_id = stream_id;
  f.offset = chunk.offset;
  f.fin = chunk.fin;
  f.data = chunk.data;
  const netem::SendResult r = tx_->Send(SerializeFrame(f));
  // Time the frame left the sender, so queueing behind earlier frames is not
  // counted as network round trip.
  chunk.last_tx_us = std::max(loop_->Now(), r.tx_done_us);
  ++chunk.tx_count;
}

void SmtConnection::SendDatagram(ByteView data) {
  Frame f;
  f.type = FrameType::kDatagram;
  f.data.assign(data.begin(), data.end());
  tx_->Send(SerializeFrame(f));
}

int64_t SmtConnection::rto_us() const {
  if (!srtt_us_) return cfg_.initial_rto_us;
  return std::max(4 * *srtt_us_, cfg_.min_rto_us);
}

bool SmtConnection::AllAcked() const {
  for (const auto& [id, s] : send_) {
    if (!s.unacked.empty()) return false;
  }
  return true;
}

uint64_t SmtConnection::acked_offset(uint32_t stream_id) const {
  auto it = send_.find(stream_id);
  return it == send_.end() ? 0 : it->second.acked;
}

std::vector<SmtEvent> SmtConnection::OnDatagram(ByteView datagram, int64_t now_us) {
  std::vector<SmtEvent> out;
  Frame f;
  try {
    f = ParseFrame(datagram);
  } catch (const MalformedError& e) {
    SmtEvent ev;
    ev.kind = SmtEvent::Kind::kConnectionError;
    ev.error = e.what();
    out.push_back(std::move(ev));
    return out;
  }
  switch (f.type) {
    case FrameType::kStream:
      OnStreamFrame(std::move(f), &out);
      break;
    case FrameType::kAck:
      OnAck(f, now_us, &out);
      break;
    case FrameType::kDatagram: {
      SmtEvent ev;
      ev.kind = SmtEvent::Kind::kDatagram;
      ev.data = std::move(f.data);
      out.push_back(std::move(ev));
      break;
    }
    case FrameType::kPing:
      break;
  }
  return out;
}

void SmtConnection::OnStreamFrame(Frame&& f, std::vector<SmtEvent>* out) {
  RecvStream& s = recv_[f.stream_id];
  const uint64_t end = f.offset + f.data.size();
  if (f.fin) {
    if (s.final_size && *s.final_size != end) {
      SmtEvent ev;
      ev.kind = SmtEvent::Kind::kConnectionError;
      ev.error = "conflicting final size on stream " + std::to_string(f.stream_id);
      out->push_back(std::move(ev));
      return;
    }
    s.final_size = end;
  }
  if (end > s.delivered) {
    auto& slot = s.pending[f.offset];
    if (f.data.size() > slot.size()) slot = std::move(f.data);
  }
  // Deliver whatever is now contiguous as one piece.
  Bytes contiguous;
  const uint64_t start = s.delivered;
  while (!s.pending.empty() && s.pending.begin()->first <= s.delivered) {
    auto it = s.pending.begin();
    const uint64_t chunk_end = it->first + it->second.size();
    if (chunk_end > s.delivered) {
      const std::size_t skip = s.delivered - it->first;
      contiguous.insert(contiguous.end(), it->second.begin() + skip, it->second.end());
      s.delivered = chunk_end;
    }
    s.pending.erase(it);
  }
  if (!contiguous.empty()) {
    SmtEvent ev;
    ev.kind = SmtEvent::Kind::kStreamData;
    ev.stream_id = f.stream_id;
    ev.offset = start;
    ev.data = std::move(contiguous);
    out->push_back(std::move(ev));
  }
  if (s.final_size && s.delivered == *s.final_size && !s.fin_delivered) {
    s.fin_delivered = true;
    SmtEvent ev;
    ev.kind = SmtEvent::Kind::kStreamFin;
    ev.stream_id = f.stream_id;
    ev.offset = s.delivered;
    out->push_back(std::move(ev));
  }
  Frame ack;
  ack.type = FrameType::kAck;
  ack.stream_id = f.stream_id;
  ack.cum_offset = s.delivered + (s.fin_delivered ? 1 : 0);
  tx_->Send(SerializeFrame(ack));
}

void SmtConnection::OnAck(const Frame& f, int64_t now_us, std::vector<SmtEvent>* out) {
  auto it = send_.find(f.stream_id);
  if (it == send_.end()) return;
  SendStream& s = it->second;
  if (f.cum_offset <= s.acked) return;
  s.acked = f.cum_offset;
  std::optional<int64_t> sample;
  bool ambiguous = false;
  while (!s.unacked.empty() && s.unacked.front().end() <= s.acked) {
    const Chunk& c = s.unacked.front();
    // Karn: a cumulative ACK covering any resent frame may have been
    // triggered by the resend, so it yields no RTT sample.
    if (c.tx_count > 1) ambiguous = true;
    if (c.end() == s.acked) sample = now_us - c.last_tx_us;
    s.unacked.pop_front();
  }
  if (sample && !ambiguous && *sample >= 0) {
    srtt_us_ = srtt_us_ ? (7 * *srtt_us_ + *sample) / 8 : *sample;
  }
  s.backoff = 1;
  SmtEvent ev;
  ev.kind = SmtEvent::Kind::kAckProcessed;
  ev.stream_id = f.stream_id;
  ev.cum_offset = s.acked;
  out->push_back(std::move(ev));
  Rearm(f.stream_id);
}

void SmtConnection::Rearm(uint32_t stream_id) {
  SendStream& s = send_.at(stream_id);
  if (s.unacked.empty()) {
    loop_->Cancel(s.timer);
    s.timer = sim::kNoTimer;
    return;
  }
  int64_t oldest = s.unacked.front().last_tx_us;
  for (const Chunk& c : s.unacked) oldest = std::min(oldest, c.last_tx_us);
  const int64_t at = oldest + std::min(rto_us() * s.backoff, cfg_.max_rto_us);
  if (s.timer != sim::kNoTimer && s.timer_at == at) return;
  loop_->Cancel(s.timer);
  s.timer_at = at;
  s.timer = loop_->PostAt(at, [this, stream_id] { OnTimeout(stream_id); });
}

void SmtConnection::OnTimeout(uint32_t stream_id) {
  SendStream& s = send_.at(stream_id);
  s.timer = sim::kNoTimer;
  const int64_t now = loop_->Now();
  const int64_t timeout = std::min(rto_us() * s.backoff, cfg_.max_rto_us);
  // Everything unacknowledged for a full timeout is presumed lost. The first
  // unacked chunk is the hole holding back the cumulative ACK; it is resent
  // on every timeout even if its previous resend is more recent.
  for (Chunk& c : s.unacked) {
    if (&c == &s.unacked.front() || c.last_tx_us + timeout <= now) {
      retransmissions_.push_back(RetransmitRecord{stream_id, c.offset, now, timeout});
      Transmit(stream_id, c);
    }
  }
  if (rto_us() * s.backoff < cfg_.max_rto_us) s.backoff *= 2;
  Rearm(stream_id);
}

}  // namespace rrsb::smt
