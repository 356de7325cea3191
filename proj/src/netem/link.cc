#include "rrsb/netem/link.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "rrsb/common/error.h"

namespace rrsb::netem {
namespace {

uint64_t Fnv1a(ByteView data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

EmuLink::EmuLink(NetProfile profile) : profile_(std::move(profile)) { profile_.Validate(); }

SendResult EmuLink::Send(Bytes datagram, int64_t now_us) {
  if (datagram.size() > kMaxDatagramSize) {
    throw Error(ErrorCode::kPrecondition,
                "datagram of " + std::to_string(datagram.size()) + " bytes exceeds 65507");
  }
  ++sent_;
  const std::size_t len = datagram.size();
  Trace(now_us, "send", len);

  const uint64_t content = Fnv1a(datagram);
  const uint64_t occurrence = occurrences_[content]++;
  std::seed_seq key{static_cast<uint32_t>(profile_.seed), static_cast<uint32_t>(profile_.seed >> 32),
                    static_cast<uint32_t>(content), static_cast<uint32_t>(content >> 32),
                    static_cast<uint32_t>(occurrence)};
  std::mt19937_64 rng(key);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double loss_draw = unit(rng);
  const double reorder_draw = unit(rng);
  std::uniform_int_distribution<int64_t> jitter(-profile_.jitter_us, profile_.jitter_us);
  const int64_t jitter_draw = jitter(rng);

  // FIFO serialization: the link is busy until the previous datagram is out.
  const int64_t start_ns = std::max(cursor_ns_, now_us * 1000);
  cursor_ns_ = start_ns + static_cast<int64_t>(len) * 8 * 1'000'000'000 / profile_.bandwidth_bps;
  SendResult result;
  result.tx_done_us = cursor_ns_ / 1000;

  bool drop = loss_draw < profile_.loss_rate;
  if (drop_filter_ && drop_filter_(datagram, now_us)) drop = true;
  for (auto [start, end] : outages_) {
    if (now_us >= start && now_us < end) drop = true;
  }
  if (drop) {
    ++dropped_;
    result.dropped = true;
    Trace(now_us, "drop", len);
    return result;
  }

  int64_t deliver = std::max(result.tx_done_us,
                             result.tx_done_us + profile_.one_way_delay_us + jitter_draw);
  const uint64_t id = next_id_++;
  if (reorder_draw < profile_.reorder_rate && !in_flight_.empty()) {
    auto& prev = in_flight_.rbegin()->second;
    const uint64_t prev_id = in_flight_.rbegin()->first;
    order_.erase({prev.datagram.deliver_at_us, prev_id});
    std::swap(deliver, prev.datagram.deliver_at_us);
    deliver = std::max(deliver, result.tx_done_us);
    order_.insert({prev.datagram.deliver_at_us, prev_id});
  }
  result.deliver_at_us = deliver;
  in_flight_.emplace(id, InFlight{Datagram{std::move(datagram), now_us, deliver},
                                  result.tx_done_us});
  order_.insert({deliver, id});
  return result;
}

std::vector<Datagram> EmuLink::Poll(int64_t now_us) {
  std::vector<Datagram> out;
  while (!order_.empty() && order_.begin()->first <= now_us) {
    const uint64_t id = order_.begin()->second;
    order_.erase(order_.begin());
    auto it = in_flight_.find(id);
    Trace(it->second.datagram.deliver_at_us, "deliver", it->second.datagram.data.size());
    out.push_back(std::move(it->second.datagram));
    in_flight_.erase(it);
  }
  return out;
}

std::optional<int64_t> EmuLink::NextDeliveryTime() const {
  if (order_.empty()) return std::nullopt;
  return order_.begin()->first;
}

void EmuLink::Trace(int64_t ts, const char* event, std::size_t bytes) {
  if (tracing_) trace_.push_back(TraceEvent{ts, event, bytes});
}

std::string EmuLink::TraceCsv() const {
  std::ostringstream out;
  out << "ts_us,event,bytes\n";
  for (const auto& e : trace_) out << e.ts_us << ',' << e.event << ',' << e.bytes << '\n';
  return out.str();
}

}  // namespace rrsb::netem
