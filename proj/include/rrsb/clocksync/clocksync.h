#ifndef RRSB_CLOCKSYNC_CLOCKSYNC_H_
#define RRSB_CLOCKSYNC_CLOCKSYNC_H_

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/sim/event_loop.h"

namespace rrsb::clocksync {

inline constexpr uint8_t kRequestType = 0x51;
inline constexpr uint8_t kReplyType = 0x52;

// t1 client send, t2 server receive, t3 server send, t4 client receive.
struct ClockSample {
  int64_t t1 = 0, t2 = 0, t3 = 0, t4 = 0;
};

struct ClockEstimate {
  int64_t offset_us = 0;  // server clock minus client clock
  int64_t rtt_us = 0;
  int samples_used = 0;
};

// Four-timestamp offset/RTT. Raises kInvalidSample on non-positive RTT or
// violated timestamp order.
ClockEstimate EstimateOffset(const ClockSample& s);

struct SyncMessage {
  uint8_t type = kRequestType;
  int64_t t1 = 0, t2 = 0, t3 = 0;  // t2/t3 only in replies
};
Bytes EncodeRequest(int64_t t1);
Bytes EncodeReply(int64_t t1, int64_t t2, int64_t t3);
// Returns nullopt for datagrams that are not sync messages.
std::optional<SyncMessage> ParseSyncMessage(ByteView data);

using SendFn = std::function<void(Bytes)>;

// Answers requests with the local receive/send times.
class SyncServer {
 public:
  SyncServer(sim::LocalClock clock, SendFn send) : clock_(clock), send_(std::move(send)) {}
  // Returns true if the datagram was a sync request.
  bool OnDatagram(ByteView data);

 private:
  sim::LocalClock clock_;
  SendFn send_;
};

struct HandshakeConfig {
  int rounds = 8;
  int64_t round_timeout_us = 250'000;
};

// Runs `rounds` request/response exchanges one after another and keeps the
// minimum-RTT sample. A round without a reply before its deadline is skipped;
// the handshake fails with kTimeout only if every round does.
class SyncClient {
 public:
  using DoneFn = std::function<void(const ClockEstimate*, const std::exception_ptr&)>;

  SyncClient(sim::EventLoop* loop, sim::LocalClock clock, SendFn send, HandshakeConfig cfg = {});
  ~SyncClient();

  void Start(DoneFn done);
  bool OnDatagram(ByteView data);
  bool finished() const { return finished_; }
  const std::vector<ClockSample>& samples() const { return samples_; }

 private:
  void SendRound();
  void Finish();

  sim::EventLoop* loop_;
  sim::LocalClock clock_;
  SendFn send_;
  HandshakeConfig cfg_;
  DoneFn done_;
  int round_ = 0;
  std::optional<int64_t> outstanding_t1_;
  sim::TimerId timer_ = sim::kNoTimer;
  std::vector<ClockSample> samples_;
  bool finished_ = false;
};

}  // namespace rrsb::clocksync

#endif  // RRSB_CLOCKSYNC_CLOCKSYNC_H_
