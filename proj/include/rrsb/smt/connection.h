#ifndef RRSB_SMT_CONNECTION_H_
#define RRSB_SMT_CONNECTION_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/netem/channel.h"
#include "rrsb/sim/event_loop.h"
#include "rrsb/smt/frame.h"

namespace rrsb::smt {

struct SmtConfig {
  std::size_t mtu_payload = 1200;
  int64_t min_rto_us = 25'000;
  // Used until the first RTT sample.
  int64_t initial_rto_us = 100'000;
  // Upper bound on the backed-off retransmission timeout.
  int64_t max_rto_us = 1'000'000;
  // Streams opened by the server side carry this bit so both ends can open
  // streams without colliding.
  bool server = false;
};

struct SmtEvent {
  enum class Kind { kStreamData, kStreamFin, kDatagram, kAckProcessed, kConnectionError };
  Kind kind = Kind::kStreamData;
  uint32_t stream_id = 0;
  uint64_t offset = 0;      // kStreamData: stream offset of data[0]
  Bytes data;               // kStreamData, kDatagram
  uint64_t cum_offset = 0;  // kAckProcessed
  std::string error;        // kConnectionError
};

struct RetransmitRecord {
  uint32_t stream_id;
  uint64_t offset;
  int64_t at_us;
  int64_t rto_us;  // timeout in force (including backoff)
};

// Reliable ordered streams plus unreliable datagrams over one datagram
// channel per direction. Single-owner; all calls come from the loop thread.
class SmtConnection {
 public:
  SmtConnection(sim::EventLoop* loop, netem::DatagramChannel* tx, SmtConfig cfg = {});
  ~SmtConnection();
  SmtConnection(const SmtConnection&) = delete;
  SmtConnection& operator=(const SmtConnection&) = delete;

  // Registers on `rx` and forwards every event to `handler`.
  void Attach(netem::DatagramChannel* rx, std::function<void(SmtEvent&&)> handler);

  uint32_t OpenStream();
  // Raises kProtocol for unknown streams or data after FIN.
  void StreamSend(uint32_t stream_id, ByteView data, bool fin = false);
  void SendDatagram(ByteView data);
  std::vector<SmtEvent> OnDatagram(ByteView datagram, int64_t now_us);

  // Bytes queued or in flight and not yet cumulatively acknowledged.
  bool AllAcked() const;
  int64_t srtt_us() const { return srtt_us_.value_or(0); }
  int64_t rto_us() const;
  const std::vector<RetransmitRecord>& retransmissions() const { return retransmissions_; }
  uint64_t acked_offset(uint32_t stream_id) const;

 private:
  struct Chunk {
    uint64_t offset;
    Bytes data;
    bool fin;
    int64_t last_tx_us;
    int tx_count;
    uint64_t end() const { return offset + data.size() + (fin ? 1 : 0); }
  };
  struct SendStream {
    uint64_t next_offset = 0;
    uint64_t acked = 0;  // cumulative, FIN counts as one byte
    bool fin_sent = false;
    std::deque<Chunk> unacked;
    int backoff = 1;
    sim::TimerId timer = sim::kNoTimer;
    int64_t timer_at = 0;
  };
  struct RecvStream {
    uint64_t delivered = 0;
    std::optional<uint64_t> final_size;
    bool fin_delivered = false;
    std::map<uint64_t, Bytes> pending;
  };

  void Transmit(uint32_t stream_id, Chunk& chunk);
  void OnStreamFrame(Frame&& f, std::vector<SmtEvent>* out);
  void OnAck(const Frame& f, int64_t now_us, std::vector<SmtEvent>* out);
  void Rearm(uint32_t stream_id);
  void OnTimeout(uint32_t stream_id);
  SendStream& SendSide(uint32_t stream_id);

  sim::EventLoop* loop_;
  netem::DatagramChannel* tx_;
  SmtConfig cfg_;
  uint32_t next_stream_id_ = 1;
  std::map<uint32_t, SendStream> send_;
  std::map<uint32_t, RecvStream> recv_;
  std::optional<int64_t> srtt_us_;
  std::vector<RetransmitRecord> retransmissions_;
};

}  // namespace rrsb::smt

#endif  // RRSB_SMT_CONNECTION_H_
