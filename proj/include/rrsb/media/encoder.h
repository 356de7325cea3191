#ifndef RRSB_MEDIA_ENCODER_H_
#define RRSB_MEDIA_ENCODER_H_

#include <cstdint>
#include <optional>

#include "rrsb/media/types.h"

namespace rrsb::media {

// Produces the raw frame for `seq`: a 4:2:0-sized buffer whose content is the
// pattern keyed by (cfg.seed, seq), stamped with `now_us` as capture time.
RawFrame SynthesizeFrame(int64_t seq, const VideoConfig& cfg, int64_t now_us);

// Stand-in for a hardware H.264 encoder. Honors GOP structure and a constant
// per-GOP byte budget; payloads are an AuHeader followed by regenerable padding.
//
// Per-GOP budget B = floor(bitrate * gop / (8 * fps)). With keyframe weight w
// and D = w + gop - 1, keyframes get floor(w * B / D) bytes and every other
// frame floor(B / D).
class MockEncoder {
 public:
  MockEncoder(const EncoderConfig& cfg, uint64_t seed);

  // Frames must arrive with strictly increasing seq (gaps allowed, e.g. after
  // an upstream drop). Throws Error(kOrdering) otherwise.
  AccessUnit Encode(const RawFrame& frame);

  int64_t gop_budget_bytes() const;
  std::size_t payload_size(bool keyframe) const;
  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  uint64_t seed_;
  std::optional<int64_t> last_seq_;
};

// Builds the AU for `seq` without a raw frame. Shares the size model and byte
// layout with MockEncoder::Encode.
AccessUnit MakeAccessUnit(const EncoderConfig& cfg, uint64_t seed, int64_t seq,
                          int64_t capture_ts_us);

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_ENCODER_H_
