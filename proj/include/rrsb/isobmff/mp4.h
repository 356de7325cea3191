#ifndef RRSB_ISOBMFF_MP4_H_
#define RRSB_ISOBMFF_MP4_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/media/types.h"

namespace rrsb::isobmff {

struct TrackConfig {
  uint32_t track_id = 1;
  uint32_t timescale = 90000;
  int width = 1920;
  int height = 1080;
};

// ftyp + moov with empty sample tables and an mvex/trex for fragments.
Bytes BuildInitSegment(const TrackConfig& cfg = {});

struct BoxInfo {
  std::string type;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Walks the top-level boxes; their sizes must tile `data` exactly.
std::vector<BoxInfo> ParseBoxes(ByteView data);

struct MediaFragment {
  uint32_t sequence_number = 0;
  int64_t base_dts_90k = 0;
  int64_t duration_90k = 0;
  Bytes bytes;  // styp + moof + mdat
};

// AUs must be non-empty with contiguous seq and increasing pts. Sample
// durations are pts deltas, the last one derived from the next frame's pts,
// so a fragment of n AUs spans exactly n frame intervals.
MediaFragment BuildFragment(std::span<const media::AccessUnit> aus,
                            uint32_t sequence_number, int fps);

struct ParsedFragment {
  uint32_t sequence_number = 0;
  int64_t base_dts_90k = 0;
  std::vector<uint32_t> sizes;
  std::vector<uint32_t> durations;
  std::vector<bool> keyframes;
  std::vector<Bytes> payloads;

  int64_t duration_90k() const;
};

// Parses one styp/moof/mdat fragment. An input without moof raises
// kNoSamples; unknown or truncated boxes raise MalformedError.
ParsedFragment ParseFragment(ByteView data);

// Parses a segment made of one or more consecutive fragments.
std::vector<ParsedFragment> ParseSegment(ByteView data);

// Accepts a byte stream in arbitrary pieces (e.g. HTTP chunks) and yields
// fragments as their mdat completes. Init-segment boxes are skipped.
class FragmentAssembler {
 public:
  std::vector<ParsedFragment> Feed(ByteView data);
  std::size_t buffered() const { return buffer_.size(); }

 private:
  Bytes buffer_;
  std::size_t fragment_start_ = 0;
  std::size_t scan_ = 0;
};

}  // namespace rrsb::isobmff

#endif  // RRSB_ISOBMFF_MP4_H_
