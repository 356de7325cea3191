#ifndef RRSB_MEDIA_AU_RECORD_H_
#define RRSB_MEDIA_AU_RECORD_H_

#include "rrsb/common/byte_io.h"
#include "rrsb/media/types.h"

namespace rrsb::media {

// Pipe/file record for one access unit, big-endian:
//   length u32 (bytes that follow) | seq u32 | pts u64 | dts u64 |
//   keyframe u8 | capture_ts_us i64 | payload
constexpr std::size_t kAuRecordFixedBytes = 29;

Bytes SerializeAu(const AccessUnit& au);
// Throws MalformedError if the length field disagrees with the input size.
AccessUnit DeserializeAu(ByteView record);

// Raw frame framing used on the source->encoder pipe:
//   length u32 | seq i64 | capture_ts_us i64 | width u32 | height u32 | payload
constexpr std::size_t kRawRecordFixedBytes = 24;

Bytes SerializeRawFrame(const RawFrame& frame);
RawFrame DeserializeRawFrame(ByteView record);

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_AU_RECORD_H_
