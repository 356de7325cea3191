#ifndef RRSB_RTP_RTP_PACKET_H_
#define RRSB_RTP_RTP_PACKET_H_

#include <array>
#include <cstdint>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/media/types.h"

namespace rrsb::rtp {

constexpr std::size_t kRtpHeaderSize = 12;
constexpr std::size_t kDefaultMtuPayload = 1200;
constexpr std::size_t kMinMtuPayload = 64;
constexpr uint8_t kDefaultPayloadType = 96;

// RFC 3550 fixed header. Extensions and CSRC lists are not produced; the
// flags are kept so parse can report what was on the wire.
struct RtpHeader {
  bool padding = false;
  bool extension = false;
  uint8_t csrc_count = 0;
  bool marker = false;
  uint8_t payload_type = kDefaultPayloadType;
  uint16_t seq = 0;
  uint32_t timestamp = 0;
  uint32_t ssrc = 0;

  bool operator==(const RtpHeader&) const = default;
};

std::array<uint8_t, kRtpHeaderSize> SerializeHeader(const RtpHeader& h);
// Throws MalformedError for short input or version != 2.
RtpHeader ParseHeader(ByteView data);

struct RtpPacket {
  RtpHeader header;
  Bytes payload;

  Bytes Serialize() const;
  static RtpPacket Parse(ByteView data);
};

// Splits the AU payload into ceil(len / mtu_payload) packets with contiguous
// (wrapping) sequence numbers, timestamp = pts (mod 2^32), marker on the last.
std::vector<RtpPacket> Packetize(const media::AccessUnit& au, std::size_t mtu_payload,
                                 uint8_t payload_type, uint32_t ssrc, uint16_t seq_start);

// Extends 32-bit RTP timestamps to a monotone 64-bit timeline.
class TimestampUnwrapper {
 public:
  int64_t Unwrap(uint32_t ts);

 private:
  bool have_last_ = false;
  int64_t last_ = 0;
};

}  // namespace rrsb::rtp

#endif  // RRSB_RTP_RTP_PACKET_H_
