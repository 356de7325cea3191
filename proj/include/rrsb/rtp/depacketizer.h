#ifndef RRSB_RTP_DEPACKETIZER_H_
#define RRSB_RTP_DEPACKETIZER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rrsb/rtp/rtp_packet.h"

namespace rrsb::rtp {

struct ReassembledAu {
  uint32_t rtp_timestamp = 0;
  Bytes payload;
  // Earliest arrival among the AU's packets.
  int64_t first_arrival_us = 0;
};

struct LossEvent {
  // False when a whole AU vanished inside a gap and its timestamp is unknown.
  bool timestamp_known = true;
  uint32_t rtp_timestamp = 0;
  int64_t detected_us = 0;
};

struct DepacketizerOutput {
  std::vector<ReassembledAu> aus;
  std::vector<LossEvent> losses;

  void Append(DepacketizerOutput&& other);
};

// Reassembles AUs from RTP packets using the marker bit and sequence-number
// continuity. Packets are consumed in sequence order; a missing sequence
// number is declared lost once the oldest packet waiting behind it has been
// held for `reorder_wait_us`. An AU touched by a gap is discarded and reported.
class Depacketizer {
 public:
  explicit Depacketizer(int64_t reorder_wait_us = 20'000);

  DepacketizerOutput Insert(const RtpPacket& packet, int64_t arrival_us);
  // Applies the reorder deadline without a new packet.
  DepacketizerOutput Expire(int64_t now_us);
  // Time at which Expire would next make progress, if anything is waiting.
  std::optional<int64_t> NextExpiry() const;

  int64_t lost_aus() const { return lost_aus_; }

 private:
  struct Pending {
    RtpPacket packet;
    int64_t arrival_us;
  };
  struct Current {
    uint32_t timestamp = 0;
    Bytes payload;
    int64_t first_arrival_us = 0;
    bool dirty = false;
    bool loss_reported = false;
  };

  int64_t UnwrapSeq(uint16_t seq);
  void Drain(int64_t now_us, DepacketizerOutput* out);
  void Consume(Pending&& p, int64_t gap, int64_t now_us, DepacketizerOutput* out);
  void ReportLoss(Current* au, int64_t now_us, DepacketizerOutput* out);

  const int64_t reorder_wait_us_;
  std::map<int64_t, Pending> pending_;
  bool started_ = false;
  int64_t first_arrival_us_ = 0;
  int64_t expected_ = 0;
  bool have_seq_ = false;
  int64_t last_unwrapped_ = 0;
  std::optional<Current> current_;
  int64_t lost_aus_ = 0;
};

}  // namespace rrsb::rtp

#endif  // RRSB_RTP_DEPACKETIZER_H_
