#include "rrsb/rtp/rtp_packet.h"

#include <algorithm>

#include "rrsb/common/error.h"

namespace rrsb::rtp {

std::array<uint8_t, kRtpHeaderSize> SerializeHeader(const RtpHeader& h) {
  std::array<uint8_t, kRtpHeaderSize> out{};
  out[0] = static_cast<uint8_t>((2 << 6) | (h.padding ? 0x20 : 0) |
                                (h.extension ? 0x10 : 0) | (h.csrc_count & 0x0f));
  out[1] = static_cast<uint8_t>((h.marker ? 0x80 : 0) | (h.payload_type & 0x7f));
  out[2] = static_cast<uint8_t>(h.seq >> 8);
  out[3] = static_cast<uint8_t>(h.seq);
  for (int i = 0; i < 4; ++i) {
    out[4 + i] = static_cast<uint8_t>(h.timestamp >> (24 - 8 * i));
    out[8 + i] = static_cast<uint8_t>(h.ssrc >> (24 - 8 * i));
  }
  return out;
}

RtpHeader ParseHeader(ByteView data) {
  if (data.size() < kRtpHeaderSize) {
    throw MalformedError("RTP header needs 12 bytes, got " + std::to_string(data.size()),
                         data.size());
  }
  ByteReader r(data);
  const uint8_t b0 = r.U8();
  if ((b0 >> 6) != 2) throw MalformedError("RTP version is not 2", 0);
  const uint8_t b1 = r.U8();
  RtpHeader h;
  h.padding = (b0 & 0x20) != 0;
  h.extension = (b0 & 0x10) != 0;
  h.csrc_count = b0 & 0x0f;
  h.marker = (b1 & 0x80) != 0;
  h.payload_type = b1 & 0x7f;
  h.seq = r.U16();
  h.timestamp = r.U32();
  h.ssrc = r.U32();
  return h;
}

Bytes RtpPacket::Serialize() const {
  Bytes out;
  out.reserve(kRtpHeaderSize + payload.size());
  auto header_bytes = SerializeHeader(header);
  out.insert(out.end(), header_bytes.begin(), header_bytes.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

RtpPacket RtpPacket::Parse(ByteView data) {
  RtpPacket p;
  p.header = ParseHeader(data);
  const std::size_t skip = kRtpHeaderSize + 4 * std::size_t{p.header.csrc_count};
  if (data.size() < skip) throw MalformedError("CSRC list truncated", data.size());
  p.payload.assign(data.begin() + static_cast<std::ptrdiff_t>(skip), data.end());
  return p;
}

std::vector<RtpPacket> Packetize(const media::AccessUnit& au, std::size_t mtu_payload,
                                 uint8_t payload_type, uint32_t ssrc, uint16_t seq_start) {
  if (mtu_payload < kMinMtuPayload) {
    throw Error(ErrorCode::kPrecondition, "mtu_payload must be >= 64");
  }
  const std::size_t total = au.payload.size();
  const std::size_t count = std::max<std::size_t>(1, (total + mtu_payload - 1) / mtu_payload);
  std::vector<RtpPacket> packets;
  packets.reserve(count);
  uint16_t seq = seq_start;
  for (std::size_t i = 0; i < count; ++i) {
    RtpPacket p;
    p.header.payload_type = payload_type;
    p.header.ssrc = ssrc;
    p.header.seq = seq++;
    p.header.timestamp = static_cast<uint32_t>(au.pts_90k);
    p.header.marker = i + 1 == count;
    const std::size_t begin = i * mtu_payload;
    const std::size_t end = std::min(total, begin + mtu_payload);
    p.payload.assign(au.payload.begin() + static_cast<std::ptrdiff_t>(begin),
                     au.payload.begin() + static_cast<std::ptrdiff_t>(end));
    packets.push_back(std::move(p));
  }
  return packets;
}

int64_t TimestampUnwrapper::Unwrap(uint32_t ts) {
  if (!have_last_) {
    have_last_ = true;
    last_ = ts;
    return last_;
  }
  const auto delta = static_cast<int32_t>(ts - static_cast<uint32_t>(last_));
  const int64_t value = last_ + delta;
  if (value > last_) last_ = value;
  return value;
}

}  // namespace rrsb::rtp
