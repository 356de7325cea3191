#ifndef RRSB_DASH_MPD_H_
#define RRSB_DASH_MPD_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace rrsb::dash {

inline constexpr char kMpdPath[] = "/live.mpd";
inline constexpr char kInitPath[] = "/init.mp4";

struct MpdConfig {
  double segment_duration_s = 2.0;
  double fragment_duration_s = 0.5;  // low latency only
  int64_t availability_start_time_us = 0;
  double minimum_update_period_s = 2.0;
  bool low_latency = false;
  // Unset: 2 segments for DASH, 3 fragments for LL-DASH.
  std::optional<double> suggested_presentation_delay_s;
  int fps = 60;
  int width = 1920;
  int height = 1080;
  int64_t bandwidth_bps = 10'000'000;

  void Validate() const;
  double SuggestedPresentationDelay() const;
  int64_t segment_duration_us() const;
  int64_t fragment_duration_us() const;
  int frames_per_segment() const;
  int frames_per_fragment() const;
  int fragments_per_segment() const;
};

using Attributes = std::map<std::string, std::string>;

struct SegmentTemplate {
  std::string initialization = "init.mp4";
  std::string media = "seg-$Number$.m4s";
  int64_t timescale = 90000;
  int64_t duration = 0;  // ticks
  int64_t start_number = 1;
  std::optional<double> availability_time_offset_s;
  std::optional<bool> availability_time_complete;
  Attributes extra;

  bool operator==(const SegmentTemplate&) const = default;
};

struct Representation {
  std::string id = "video";
  int64_t bandwidth = 0;
  int width = 0;
  int height = 0;
  std::string codecs = "avc1.640028";
  Attributes extra;

  bool operator==(const Representation&) const = default;
};

struct AdaptationSet {
  std::string mime_type = "video/mp4";
  std::string content_type = "video";
  int frame_rate = 0;
  SegmentTemplate segment_template;
  Representation representation;
  Attributes extra;

  bool operator==(const AdaptationSet&) const = default;
};

struct MpdDocument {
  std::string type = "dynamic";
  std::string profiles = "urn:mpeg:dash:profile:isoff-live:2011";
  int64_t availability_start_time_us = 0;
  double minimum_update_period_s = 0;
  double suggested_presentation_delay_s = 0;
  double min_buffer_time_s = 0;
  std::string period_id = "0";
  int64_t period_start_us = 0;
  AdaptationSet adaptation_set;
  Attributes extra;

  bool operator==(const MpdDocument&) const = default;
};

MpdDocument ModelFromConfig(const MpdConfig& cfg);
// Inverse of ModelFromConfig for the fields a player needs. Raises
// MalformedError if the timing attributes are inconsistent.
MpdConfig ConfigFromModel(const MpdDocument& doc);
std::string RenderMpd(const MpdDocument& doc);
std::string RenderMpd(const MpdConfig& cfg);
// Raises MalformedError for non-XML input or XML that is not an MPD.
MpdDocument ParseMpd(std::string_view text);

// 1-based segment number holding frame `seq`.
int64_t SegmentForFrame(int64_t seq, int fps, const MpdConfig& cfg);
// DASH: the segment is complete at AST + N x segment_duration. LL-DASH: the
// segment URL is admitted at AST + (N - 1) x segment_duration.
int64_t AvailabilityTime(int64_t segment_number, const MpdConfig& cfg);
// LL-DASH: time the k-th (0-based) fragment of segment N is flushed.
int64_t FragmentAvailabilityTime(int64_t segment_number, int fragment_index,
                                 const MpdConfig& cfg);
std::string SegmentPath(int64_t segment_number);
// Returns the segment number for "/seg-N.m4s", nullopt otherwise.
std::optional<int64_t> ParseSegmentPath(std::string_view path);

// xs:dateTime with microseconds, UTC.
std::string FormatUtc(int64_t epoch_us);
int64_t ParseUtc(std::string_view text);
// xs:duration in the PT[nH][nM][n.nS] form.
std::string FormatDuration(double seconds);
double ParseDuration(std::string_view text);

}  // namespace rrsb::dash

#endif  // RRSB_DASH_MPD_H_
