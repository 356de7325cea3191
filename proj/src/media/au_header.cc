#include "rrsb/media/au_header.h"

#include <algorithm>
#include <vector>

#include "rrsb/media/pattern.h"

namespace rrsb::media {

void WriteAuHeader(uint32_t seq, int64_t capture_ts_us, uint32_t payload_len,
                   std::span<uint8_t> out) {
  Bytes header;
  header.reserve(kAuHeaderSize);
  ByteWriter w(&header);
  w.Append(ByteView(kAuMagic));
  w.U8(kAuVersion);
  w.U32(seq);
  w.I64(capture_ts_us);
  w.U32(payload_len);
  w.U32(Crc32(header));
  std::copy(header.begin(), header.end(), out.begin());
}

AuHeader ParseAuHeader(ByteView data) {
  if (data.empty()) throw MalformedError("empty access unit", 0);
  ByteReader r(data);
  ByteView magic = r.Take(4);
  if (!std::equal(magic.begin(), magic.end(), kAuMagic.begin())) {
    throw MalformedError("bad access unit magic", 0);
  }
  if (r.U8() != kAuVersion) throw MalformedError("unsupported AU version", 4);
  AuHeader h;
  h.seq = r.U32();
  h.capture_ts_us = r.I64();
  h.payload_len = r.U32();
  h.crc32 = r.U32();
  return h;
}

DecodedAu DecodeVerify(ByteView au_bytes, uint64_t seed) {
  AuHeader h = ParseAuHeader(au_bytes);
  DecodedAu out{h.seq, h.capture_ts_us, false};
  if (Crc32(au_bytes.first(kAuHeaderSize - 4)) != h.crc32) return out;
  if (h.payload_len < kAuHeaderSize || au_bytes.size() < h.payload_len) {
    throw MalformedError("access unit truncated", au_bytes.size());
  }
  if (au_bytes.size() != h.payload_len) return out;
  std::vector<uint8_t> expected(h.payload_len - kAuHeaderSize);
  FillPattern(seed, h.seq, PatternDomain::kAuPadding, expected);
  ByteView padding = au_bytes.subspan(kAuHeaderSize);
  out.verified = std::equal(padding.begin(), padding.end(), expected.begin());
  return out;
}

}  // namespace rrsb::media
