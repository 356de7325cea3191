#ifndef RRSB_MEDIA_AU_HEADER_H_
#define RRSB_MEDIA_AU_HEADER_H_

#include <array>
#include <cstdint>

#include "rrsb/common/byte_io.h"

namespace rrsb::media {

// Header embedded at the start of every access unit payload:
//   magic "RRAU" | version u8 | seq u32 | capture_ts_us u64 | payload_len u32 |
//   crc32 u32 (over the preceding 21 bytes). All big-endian.
constexpr std::size_t kAuHeaderSize = 25;
constexpr std::array<uint8_t, 4> kAuMagic = {'R', 'R', 'A', 'U'};
constexpr uint8_t kAuVersion = 1;

struct AuHeader {
  uint32_t seq = 0;
  int64_t capture_ts_us = 0;
  uint32_t payload_len = 0;
  uint32_t crc32 = 0;
};

// Writes the header (crc computed here) into the first 25 bytes of `out`.
void WriteAuHeader(uint32_t seq, int64_t capture_ts_us, uint32_t payload_len,
                   std::span<uint8_t> out);

// Parses the header fields. Throws MalformedError on short input, bad magic or
// unknown version. Does not check the crc.
AuHeader ParseAuHeader(ByteView data);

struct DecodedAu {
  uint32_t seq = 0;
  int64_t capture_ts_us = 0;
  bool verified = false;
};

// Receiver-side timestamp extraction. verified is true iff the header crc
// matches and the padding equals the pattern regenerated from (seed, seq).
DecodedAu DecodeVerify(ByteView au_bytes, uint64_t seed);

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_AU_HEADER_H_
