#ifndef RRSB_MEDIA_TYPES_H_
#define RRSB_MEDIA_TYPES_H_

#include <cstdint>
#include <vector>

namespace rrsb::media {

constexpr int64_t kTimescale90k = 90000;

struct VideoConfig {
  int width = 1920;
  int height = 1080;
  int fps = 60;
  uint64_t seed = 1;

  void Validate() const;
  // 4:2:0 frame size in bytes.
  std::size_t RawFrameBytes() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3 / 2;
  }
};

struct EncoderConfig {
  int gop_length = 5;
  int64_t bitrate_bps = 10'000'000;
  int fps = 60;
  int i_to_p_weight = 3;

  void Validate() const;
};

struct RawFrame {
  int64_t seq = 0;
  int64_t capture_ts_us = 0;
  int width = 0;
  int height = 0;
  std::vector<uint8_t> payload;
};

struct AccessUnit {
  int64_t seq = 0;
  int64_t pts_90k = 0;
  int64_t dts_90k = 0;
  bool keyframe = false;
  int64_t capture_ts_us = 0;
  std::vector<uint8_t> payload;

  bool operator==(const AccessUnit&) const = default;
};

// round(seq * 90000 / fps), ties away from zero.
inline int64_t PtsForFrame(int64_t seq, int fps) {
  return (seq * kTimescale90k * 2 + fps) / (2 * static_cast<int64_t>(fps));
}

}  // namespace rrsb::media

#endif  // RRSB_MEDIA_TYPES_H_
