#include "rrsb/rtp/depacketizer.h"

#include <algorithm>

namespace rrsb::rtp {

void DepacketizerOutput::Append(DepacketizerOutput&& other) {
  for (auto& au : other.aus) aus.push_back(std::move(au));
  for (auto& loss : other.losses) losses.push_back(loss);
}

Depacketizer::Depacketizer(int64_t reorder_wait_us) : reorder_wait_us_(reorder_wait_us) {}

int64_t Depacketizer::UnwrapSeq(uint16_t seq) {
  if (!have_seq_) {
    have_seq_ = true;
    last_unwrapped_ = seq;
    return seq;
  }
  const auto delta = static_cast<int16_t>(seq - static_cast<uint16_t>(last_unwrapped_));
  const int64_t value = last_unwrapped_ + delta;
  if (value > last_unwrapped_) last_unwrapped_ = value;
  return value;
}

DepacketizerOutput Depacketizer::Insert(const RtpPacket& packet, int64_t arrival_us) {
  DepacketizerOutput out;
  const int64_t seq = UnwrapSeq(packet.header.seq);
  if (!started_ && pending_.empty()) first_arrival_us_ = arrival_us;
  if (started_ && seq < expected_) return out;  // duplicate or given up on
  pending_.emplace(seq, Pending{packet, arrival_us});
  Drain(arrival_us, &out);
  return out;
}

DepacketizerOutput Depacketizer::Expire(int64_t now_us) {
  DepacketizerOutput out;
  Drain(now_us, &out);
  return out;
}

std::optional<int64_t> Depacketizer::NextExpiry() const {
  if (pending_.empty()) return std::nullopt;
  if (!started_) return first_arrival_us_ + reorder_wait_us_;
  if (pending_.begin()->first == expected_) return std::nullopt;
  int64_t oldest = pending_.begin()->second.arrival_us;
  for (const auto& [seq, p] : pending_) oldest = std::min(oldest, p.arrival_us);
  return oldest + reorder_wait_us_;
}

void Depacketizer::Drain(int64_t now_us, DepacketizerOutput* out) {
  if (!started_) {
    // Hold the first packets briefly so a reordered stream start is seen.
    if (now_us < first_arrival_us_ + reorder_wait_us_) return;
    started_ = true;
    expected_ = pending_.begin()->first;
  }
  while (!pending_.empty()) {
    auto head = pending_.begin();
    if (head->first == expected_) {
      Pending p = std::move(head->second);
      pending_.erase(head);
      ++expected_;
      Consume(std::move(p), 0, now_us, out);
      continue;
    }
    auto next_expiry = NextExpiry();
    if (!next_expiry || now_us < *next_expiry) return;
    const int64_t gap = head->first - expected_;
    Pending p = std::move(head->second);
    expected_ = head->first + 1;
    pending_.erase(head);
    Consume(std::move(p), gap, now_us, out);
  }
}

void Depacketizer::ReportLoss(Current* au, int64_t now_us, DepacketizerOutput* out) {
  if (au->loss_reported) return;
  au->loss_reported = true;
  ++lost_aus_;
  out->losses.push_back(LossEvent{true, au->timestamp, now_us});
}

void Depacketizer::Consume(Pending&& p, int64_t gap, int64_t now_us,
                           DepacketizerOutput* out) {
  const RtpHeader& h = p.packet.header;
  bool start_dirty = false;
  if (gap > 0) {
    if (current_) {
      // The AU in progress has lost at least its marker packet.
      ReportLoss(&*current_, now_us, out);
      if (h.timestamp == current_->timestamp) {
        current_->dirty = true;
      } else {
        // Exactly one missing packet must have been that marker; with more
        // missing, this AU's head may be gone too.
        start_dirty = gap > 1;
        current_.reset();
      }
    } else {
      // The gap may hold whole AUs and/or the head of this one.
      start_dirty = true;
    }
  }
  if (current_ && h.timestamp != current_->timestamp) {
    // New timestamp without a marker on the previous AU.
    ReportLoss(&*current_, now_us, out);
    current_.reset();
  }
  if (!current_) {
    current_.emplace();
    current_->timestamp = h.timestamp;
    current_->first_arrival_us = p.arrival_us;
    current_->dirty = start_dirty;
  }
  current_->first_arrival_us = std::min(current_->first_arrival_us, p.arrival_us);
  current_->payload.insert(current_->payload.end(), p.packet.payload.begin(),
                           p.packet.payload.end());
  if (!h.marker) return;
  if (current_->dirty) {
    ReportLoss(&*current_, now_us, out);
  } else {
    out->aus.push_back(ReassembledAu{current_->timestamp, std::move(current_->payload),
                                     current_->first_arrival_us});
  }
  current_.reset();
}

}  // namespace rrsb::rtp
