#ifndef RRSB_SMT_FRAME_H_
#define RRSB_SMT_FRAME_H_

#include <cstdint>

#include "rrsb/common/byte_io.h"

namespace rrsb::smt {

enum class FrameType : uint8_t { kStream = 0, kAck = 1, kDatagram = 2, kPing = 3 };

inline constexpr std::size_t kStreamHeaderSize = 16;  // type, id, offset, flags, len
inline constexpr std::size_t kAckSize = 13;
inline constexpr std::size_t kDatagramHeaderSize = 3;
inline constexpr uint8_t kFinFlag = 0x01;

struct Frame {
  FrameType type = FrameType::kPing;
  uint32_t stream_id = 0;
  uint64_t offset = 0;      // STREAM
  bool fin = false;         // STREAM
  uint64_t cum_offset = 0;  // ACK
  Bytes data;               // STREAM, DATAGRAM

  bool operator==(const Frame&) const = default;
};

Bytes SerializeFrame(const Frame& f);
// Exactly one frame per datagram; trailing or missing bytes are malformed.
Frame ParseFrame(ByteView datagram);

}  // namespace rrsb::smt

#endif  // RRSB_SMT_FRAME_H_
