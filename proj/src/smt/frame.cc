#include "rrsb/smt/frame.h"

#include "rrsb/common/error.h"

namespace rrsb::smt {

Bytes SerializeFrame(const Frame& f) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(f.type));
  switch (f.type) {
    case FrameType::kStream:
      if (f.data.size() > 0xffff) throw Error(ErrorCode::kPrecondition, "STREAM data > 65535");
      w.U32(f.stream_id);
      w.U64(f.offset);
      w.U8(f.fin ? kFinFlag : 0);
      w.U16(static_cast<uint16_t>(f.data.size()));
      w.Append(f.data);
      break;
    case FrameType::kAck:
      w.U32(f.stream_id);
      w.U64(f.cum_offset);
      break;
    case FrameType::kDatagram:
      if (f.data.size() > 0xffff) throw Error(ErrorCode::kPrecondition, "DATAGRAM data > 65535");
      w.U16(static_cast<uint16_t>(f.data.size()));
      w.Append(f.data);
      break;
    case FrameType::kPing:
      break;
  }
  return w.Take();
}

Frame ParseFrame(ByteView datagram) {
  ByteReader r(datagram);
  Frame f;
  const uint8_t type = r.U8();
  switch (type) {
    case 0: {
      f.type = FrameType::kStream;
      f.stream_id = r.U32();
      f.offset = r.U64();
      const uint8_t flags = r.U8();
      if (flags & ~kFinFlag) throw MalformedError("unknown STREAM flags", 13);
      f.fin = flags & kFinFlag;
      const uint16_t len = r.U16();
      ByteView data = r.Take(len);
      f.data.assign(data.begin(), data.end());
      break;
    }
    case 1:
      f.type = FrameType::kAck;
      f.stream_id = r.U32();
      f.cum_offset = r.U64();
      break;
    case 2: {
      f.type = FrameType::kDatagram;
      const uint16_t len = r.U16();
      ByteView data = r.Take(len);
      f.data.assign(data.begin(), data.end());
      break;
    }
    case 3:
      f.type = FrameType::kPing;
      break;
    default:
      throw MalformedError("unknown frame type " + std::to_string(type), 0);
  }
  if (!r.empty()) throw MalformedError("trailing bytes after frame", r.position());
  return f;
}

}  // namespace rrsb::smt
