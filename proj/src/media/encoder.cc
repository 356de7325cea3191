#include "rrsb/media/encoder.h"

#include <algorithm>
#include <string>

#include "rrsb/common/error.h"
#include "rrsb/media/au_header.h"
#include "rrsb/media/pattern.h"

namespace rrsb::media {

void VideoConfig::Validate() const {
  if (width <= 0 || height <= 0 || fps <= 0) {
    throw Error(ErrorCode::kPrecondition, "video width, height and fps must be > 0");
  }
}

void EncoderConfig::Validate() const {
  if (gop_length < 1) throw Error(ErrorCode::kPrecondition, "gop_length must be >= 1");
  if (fps <= 0 || bitrate_bps <= 0 || i_to_p_weight <= 0) {
    throw Error(ErrorCode::kPrecondition, "encoder fps, bitrate and weight must be > 0");
  }
}

RawFrame SynthesizeFrame(int64_t seq, const VideoConfig& cfg, int64_t now_us) {
  if (seq < 0) throw Error(ErrorCode::kPrecondition, "seq must be >= 0");
  cfg.Validate();
  RawFrame frame;
  frame.seq = seq;
  frame.capture_ts_us = now_us;
  frame.width = cfg.width;
  frame.height = cfg.height;
  frame.payload.resize(cfg.RawFrameBytes());
  FillPattern(cfg.seed, seq, PatternDomain::kRawPixels, frame.payload);
  return frame;
}

namespace {

int64_t GopBudget(const EncoderConfig& cfg) {
  return cfg.bitrate_bps * cfg.gop_length / (8 * static_cast<int64_t>(cfg.fps));
}

std::size_t PayloadSize(const EncoderConfig& cfg, bool keyframe) {
  const int64_t budget = GopBudget(cfg);
  const int64_t denom = cfg.i_to_p_weight + (cfg.gop_length - 1);
  const int64_t bytes = keyframe ? cfg.i_to_p_weight * budget / denom : budget / denom;
  return std::max<std::size_t>(static_cast<std::size_t>(bytes), kAuHeaderSize);
}

}  // namespace

AccessUnit MakeAccessUnit(const EncoderConfig& cfg, uint64_t seed, int64_t seq,
                          int64_t capture_ts_us) {
  AccessUnit au;
  au.seq = seq;
  au.pts_90k = PtsForFrame(seq, cfg.fps);
  au.dts_90k = au.pts_90k;
  au.keyframe = seq % cfg.gop_length == 0;
  au.capture_ts_us = capture_ts_us;
  au.payload.resize(PayloadSize(cfg, au.keyframe));
  WriteAuHeader(static_cast<uint32_t>(seq), capture_ts_us,
                static_cast<uint32_t>(au.payload.size()), au.payload);
  FillPattern(seed, seq, PatternDomain::kAuPadding,
              std::span<uint8_t>(au.payload).subspan(kAuHeaderSize));
  return au;
}

MockEncoder::MockEncoder(const EncoderConfig& cfg, uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.Validate();
}

AccessUnit MockEncoder::Encode(const RawFrame& frame) {
  if (last_seq_ && frame.seq <= *last_seq_) {
    throw Error(ErrorCode::kOrdering, "frame " + std::to_string(frame.seq) +
                                          " presented after " +
                                          std::to_string(*last_seq_));
  }
  last_seq_ = frame.seq;
  return MakeAccessUnit(cfg_, seed_, frame.seq, frame.capture_ts_us);
}

int64_t MockEncoder::gop_budget_bytes() const { return GopBudget(cfg_); }

std::size_t MockEncoder::payload_size(bool keyframe) const {
  return PayloadSize(cfg_, keyframe);
}

}  // namespace rrsb::media
