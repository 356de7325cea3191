#include "rrsb/media/au_record.h"

namespace rrsb::media {

Bytes SerializeAu(const AccessUnit& au) {
  Bytes out;
  out.reserve(4 + kAuRecordFixedBytes + au.payload.size());
  ByteWriter w(&out);
  w.U32(static_cast<uint32_t>(kAuRecordFixedBytes + au.payload.size()));
  w.U32(static_cast<uint32_t>(au.seq));
  w.U64(static_cast<uint64_t>(au.pts_90k));
  w.U64(static_cast<uint64_t>(au.dts_90k));
  w.U8(au.keyframe ? 1 : 0);
  w.I64(au.capture_ts_us);
  w.Append(au.payload);
  return out;
}

AccessUnit DeserializeAu(ByteView record) {
  ByteReader r(record);
  const uint32_t length = r.U32();
  if (length < kAuRecordFixedBytes || length != r.remaining()) {
    throw MalformedError("AU record length " + std::to_string(length) +
                             " does not match " + std::to_string(r.remaining()) +
                             " available bytes",
                         0);
  }
  AccessUnit au;
  au.seq = r.U32();
  au.pts_90k = static_cast<int64_t>(r.U64());
  au.dts_90k = static_cast<int64_t>(r.U64());
  au.keyframe = r.U8() != 0;
  au.capture_ts_us = r.I64();
  ByteView payload = r.Take(r.remaining());
  au.payload.assign(payload.begin(), payload.end());
  return au;
}

Bytes SerializeRawFrame(const RawFrame& frame) {
  Bytes out;
  out.reserve(4 + kRawRecordFixedBytes + frame.payload.size());
  ByteWriter w(&out);
  w.U32(static_cast<uint32_t>(kRawRecordFixedBytes + frame.payload.size()));
  w.I64(frame.seq);
  w.I64(frame.capture_ts_us);
  w.U32(static_cast<uint32_t>(frame.width));
  w.U32(static_cast<uint32_t>(frame.height));
  w.Append(frame.payload);
  return out;
}

RawFrame DeserializeRawFrame(ByteView record) {
  ByteReader r(record);
  const uint32_t length = r.U32();
  if (length < kRawRecordFixedBytes || length != r.remaining()) {
    throw MalformedError("raw frame record length mismatch", 0);
  }
  RawFrame frame;
  frame.seq = r.I64();
  frame.capture_ts_us = r.I64();
  frame.width = static_cast<int>(r.U32());
  frame.height = static_cast<int>(r.U32());
  ByteView payload = r.Take(r.remaining());
  frame.payload.assign(payload.begin(), payload.end());
  return frame;
}

}  // namespace rrsb::media
