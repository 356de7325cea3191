#ifndef RRSB_NETEM_LINK_H_
#define RRSB_NETEM_LINK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/netem/profile.h"

namespace rrsb::netem {

inline constexpr std::size_t kMaxDatagramSize = 65507;

struct Datagram {
  Bytes data;
  int64_t sent_us = 0;
  int64_t deliver_at_us = 0;
};

struct SendResult {
  bool dropped = false;
  // End of serialization onto the link.
  int64_t tx_done_us = 0;
  int64_t deliver_at_us = 0;
};

struct TraceEvent {
  int64_t ts_us;
  std::string event;  // send, drop, deliver
  std::size_t bytes;
};

// One direction of an emulated link. Random draws for a datagram depend only
// on the seed, its content and how many identical datagrams preceded it, so
// traffic added elsewhere on the link does not perturb them.
class EmuLink {
 public:
  explicit EmuLink(NetProfile profile);

  // Oversize datagrams raise kPrecondition.
  SendResult Send(Bytes datagram, int64_t now_us);
  // Everything due at `now_us`, in delivery order.
  std::vector<Datagram> Poll(int64_t now_us);
  std::optional<int64_t> NextDeliveryTime() const;

  // Forces a drop whenever the filter returns true (test fault injection).
  void SetDropFilter(std::function<bool(ByteView, int64_t now_us)> filter) {
    drop_filter_ = std::move(filter);
  }
  // Datagrams sent within [start, end) are dropped.
  void AddOutage(int64_t start_us, int64_t end_us) { outages_.emplace_back(start_us, end_us); }

  void EnableTrace() { tracing_ = true; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  std::string TraceCsv() const;

  const NetProfile& profile() const { return profile_; }
  int64_t sent() const { return sent_; }
  int64_t dropped() const { return dropped_; }

 private:
  struct InFlight {
    Datagram datagram;
    int64_t tx_done_us;
  };

  void Trace(int64_t ts, const char* event, std::size_t bytes);

  NetProfile profile_;
  int64_t cursor_ns_ = 0;
  uint64_t next_id_ = 0;
  std::map<uint64_t, InFlight> in_flight_;
  std::set<std::pair<int64_t, uint64_t>> order_;
  std::unordered_map<uint64_t, uint64_t> occurrences_;
  std::function<bool(ByteView, int64_t)> drop_filter_;
  std::vector<std::pair<int64_t, int64_t>> outages_;
  bool tracing_ = false;
  std::vector<TraceEvent> trace_;
  int64_t sent_ = 0;
  int64_t dropped_ = 0;
};

}  // namespace rrsb::netem

#endif  // RRSB_NETEM_LINK_H_
