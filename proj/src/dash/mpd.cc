#include "rrsb/dash/mpd.h"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "rrsb/common/error.h"

namespace rrsb::dash {
namespace {

namespace pt = boost::property_tree;

constexpr char kMpdNamespace[] = "urn:mpeg:dash:schema:mpd:2011";

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view text, std::string_view what) {
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw MalformedError("bad number for " + std::string(what) + ": '" + std::string(text) + "'",
                         0);
  }
  return v;
}

int64_t ParseInt(std::string_view text, std::string_view what) {
  int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw MalformedError("bad integer for " + std::string(what) + ": '" + std::string(text) + "'",
                         0);
  }
  return v;
}

// Pulls known attributes out of an <xmlattr> subtree, leaving the rest in `extra`.
class AttrReader {
 public:
  AttrReader(const pt::ptree& node, std::string element) : element_(std::move(element)) {
    if (auto attrs = node.get_child_optional("<xmlattr>")) {
      for (const auto& [key, value] : *attrs) remaining_[key] = value.data();
    }
  }

  std::optional<std::string> Take(const std::string& key) {
    auto it = remaining_.find(key);
    if (it == remaining_.end()) return std::nullopt;
    std::string v = it->second;
    remaining_.erase(it);
    return v;
  }
  std::string Require(const std::string& key) {
    auto v = Take(key);
    if (!v) throw MalformedError(element_ + " lacks @" + key, 0);
    return *v;
  }
  Attributes Rest() { return std::move(remaining_); }

 private:
  std::string element_;
  Attributes remaining_;
};

const pt::ptree& RequireChild(const pt::ptree& node, const std::string& name,
                              const std::string& parent) {
  auto child = node.get_child_optional(name);
  if (!child) throw MalformedError(parent + " lacks <" + name + ">", 0);
  return *child;
}

void PutExtra(pt::ptree& node, const Attributes& extra) {
  for (const auto& [k, v] : extra) node.put("<xmlattr>." + k, v);
}

}  // namespace

void MpdConfig::Validate() const {
  if (!(segment_duration_s > 0)) throw Error(ErrorCode::kPrecondition, "segment duration <= 0");
  if (fps <= 0) throw Error(ErrorCode::kPrecondition, "fps <= 0");
  const double frames = segment_duration_s * fps;
  if (std::abs(frames - std::round(frames)) > 1e-9) {
    throw Error(ErrorCode::kPrecondition, "segment must hold a whole number of frames");
  }
  if (low_latency) {
    if (!(fragment_duration_s > 0)) {
      throw Error(ErrorCode::kPrecondition, "fragment duration <= 0");
    }
    const double ratio = segment_duration_s / fragment_duration_s;
    const double ffr = fragment_duration_s * fps;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::abs(ffr - std::round(ffr)) > 1e-9) {
      throw Error(ErrorCode::kPrecondition,
                  "fragment duration must divide the segment into whole frames");
    }
  }
}

double MpdConfig::SuggestedPresentationDelay() const {
  if (suggested_presentation_delay_s) return *suggested_presentation_delay_s;
  return low_latency ? 3 * fragment_duration_s : 2 * segment_duration_s;
}

int64_t MpdConfig::segment_duration_us() const {
  return std::llround(segment_duration_s * 1e6);
}
int64_t MpdConfig::fragment_duration_us() const {
  return std::llround(fragment_duration_s * 1e6);
}
int MpdConfig::frames_per_segment() const {
  return static_cast<int>(std::lround(segment_duration_s * fps));
}
int MpdConfig::frames_per_fragment() const {
  return low_latency ? static_cast<int>(std::lround(fragment_duration_s * fps))
                     : frames_per_segment();
}
int MpdConfig::fragments_per_segment() const {
  return frames_per_segment() / frames_per_fragment();
}

MpdDocument ModelFromConfig(const MpdConfig& cfg) {
  cfg.Validate();
  MpdDocument doc;
  doc.availability_start_time_us = cfg.availability_start_time_us;
  doc.minimum_update_period_s = cfg.minimum_update_period_s;
  doc.suggested_presentation_delay_s = cfg.SuggestedPresentationDelay();
  doc.min_buffer_time_s = cfg.low_latency ? cfg.fragment_duration_s : cfg.segment_duration_s;
  auto& as = doc.adaptation_set;
  as.frame_rate = cfg.fps;
  as.representation.bandwidth = cfg.bandwidth_bps;
  as.representation.width = cfg.width;
  as.representation.height = cfg.height;
  as.segment_template.duration = std::llround(cfg.segment_duration_s * 90000);
  if (cfg.low_latency) {
    as.segment_template.availability_time_offset_s =
        cfg.segment_duration_s - cfg.fragment_duration_s;
    as.segment_template.availability_time_complete = false;
  }
  return doc;
}

MpdConfig ConfigFromModel(const MpdDocument& doc) {
  const auto& as = doc.adaptation_set;
  const auto& st = as.segment_template;
  if (st.timescale <= 0 || st.duration <= 0) {
    throw MalformedError("SegmentTemplate needs positive timescale and duration", 0);
  }
  MpdConfig cfg;
  cfg.availability_start_time_us = doc.availability_start_time_us;
  cfg.minimum_update_period_s = doc.minimum_update_period_s;
  cfg.suggested_presentation_delay_s = doc.suggested_presentation_delay_s;
  cfg.segment_duration_s = static_cast<double>(st.duration) / static_cast<double>(st.timescale);
  cfg.low_latency = st.availability_time_offset_s.has_value();
  if (cfg.low_latency) {
    cfg.fragment_duration_s = cfg.segment_duration_s - *st.availability_time_offset_s;
  }
  cfg.fps = as.frame_rate;
  cfg.width = as.representation.width;
  cfg.height = as.representation.height;
  cfg.bandwidth_bps = as.representation.bandwidth;
  try {
    cfg.Validate();
  } catch (const Error& e) {
    throw MalformedError(std::string("inconsistent MPD timing: ") + e.what(), 0);
  }
  return cfg;
}

std::string RenderMpd(const MpdDocument& doc) {
  pt::ptree root;
  pt::ptree& mpd = root.add("MPD", "");
  mpd.put("<xmlattr>.xmlns", kMpdNamespace);
  mpd.put("<xmlattr>.type", doc.type);
  mpd.put("<xmlattr>.profiles", doc.profiles);
  mpd.put("<xmlattr>.availabilityStartTime", FormatUtc(doc.availability_start_time_us));
  mpd.put("<xmlattr>.minimumUpdatePeriod", FormatDuration(doc.minimum_update_period_s));
  mpd.put("<xmlattr>.suggestedPresentationDelay",
          FormatDuration(doc.suggested_presentation_delay_s));
  mpd.put("<xmlattr>.minBufferTime", FormatDuration(doc.min_buffer_time_s));
  PutExtra(mpd, doc.extra);

  pt::ptree& period = mpd.add("Period", "");
  period.put("<xmlattr>.id", doc.period_id);
  period.put("<xmlattr>.start", FormatDuration(doc.period_start_us / 1e6));

  const AdaptationSet& as = doc.adaptation_set;
  pt::ptree& as_node = period.add("AdaptationSet", "");
  as_node.put("<xmlattr>.mimeType", as.mime_type);
  as_node.put("<xmlattr>.contentType", as.content_type);
  as_node.put("<xmlattr>.frameRate", as.frame_rate);
  as_node.put("<xmlattr>.segmentAlignment", "true");
  PutExtra(as_node, as.extra);

  const SegmentTemplate& st = as.segment_template;
  pt::ptree& st_node = as_node.add("SegmentTemplate", "");
  st_node.put("<xmlattr>.initialization", st.initialization);
  st_node.put("<xmlattr>.media", st.media);
  st_node.put("<xmlattr>.timescale", st.timescale);
  st_node.put("<xmlattr>.duration", st.duration);
  st_node.put("<xmlattr>.startNumber", st.start_number);
  if (st.availability_time_offset_s) {
    st_node.put("<xmlattr>.availabilityTimeOffset",
                FormatDouble(*st.availability_time_offset_s));
  }
  if (st.availability_time_complete) {
    st_node.put("<xmlattr>.availabilityTimeComplete",
                *st.availability_time_complete ? "true" : "false");
  }
  PutExtra(st_node, st.extra);

  const Representation& rep = as.representation;
  pt::ptree& rep_node = as_node.add("Representation", "");
  rep_node.put("<xmlattr>.id", rep.id);
  rep_node.put("<xmlattr>.bandwidth", rep.bandwidth);
  rep_node.put("<xmlattr>.width", rep.width);
  rep_node.put("<xmlattr>.height", rep.height);
  rep_node.put("<xmlattr>.codecs", rep.codecs);
  PutExtra(rep_node, rep.extra);

  std::ostringstream out;
  pt::write_xml(out, root, pt::xml_writer_make_settings<std::string>(' ', 2));
  return out.str();
}

std::string RenderMpd(const MpdConfig& cfg) { return RenderMpd(ModelFromConfig(cfg)); }

MpdDocument ParseMpd(std::string_view text) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, root);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedError(std::string("XML: ") + e.message(), 0);
  }
  const pt::ptree& mpd = RequireChild(root, "MPD", "document");
  MpdDocument doc;
  AttrReader a(mpd, "MPD");
  a.Take("xmlns");
  doc.type = a.Require("type");
  doc.profiles = a.Take("profiles").value_or("");
  doc.availability_start_time_us = ParseUtc(a.Require("availabilityStartTime"));
  if (auto v = a.Take("minimumUpdatePeriod")) doc.minimum_update_period_s = ParseDuration(*v);
  if (auto v = a.Take("suggestedPresentationDelay")) {
    doc.suggested_presentation_delay_s = ParseDuration(*v);
  }
  if (auto v = a.Take("minBufferTime")) doc.min_buffer_time_s = ParseDuration(*v);
  doc.extra = a.Rest();

  const pt::ptree& period = RequireChild(mpd, "Period", "MPD");
  AttrReader pa(period, "Period");
  doc.period_id = pa.Take("id").value_or("");
  if (auto v = pa.Take("start")) doc.period_start_us = std::llround(ParseDuration(*v) * 1e6);

  const pt::ptree& as_node = RequireChild(period, "AdaptationSet", "Period");
  AdaptationSet& as = doc.adaptation_set;
  AttrReader aa(as_node, "AdaptationSet");
  as.mime_type = aa.Take("mimeType").value_or("");
  as.content_type = aa.Take("contentType").value_or("");
  if (auto v = aa.Take("frameRate")) as.frame_rate = static_cast<int>(ParseInt(*v, "frameRate"));
  aa.Take("segmentAlignment");
  as.extra = aa.Rest();

  const pt::ptree& st_node = RequireChild(as_node, "SegmentTemplate", "AdaptationSet");
  SegmentTemplate& st = as.segment_template;
  AttrReader sa(st_node, "SegmentTemplate");
  st.initialization = sa.Take("initialization").value_or("");
  st.media = sa.Require("media");
  st.timescale = ParseInt(sa.Take("timescale").value_or("1"), "timescale");
  st.duration = ParseInt(sa.Require("duration"), "duration");
  st.start_number = ParseInt(sa.Take("startNumber").value_or("1"), "startNumber");
  if (auto v = sa.Take("availabilityTimeOffset")) {
    st.availability_time_offset_s = ParseDouble(*v, "availabilityTimeOffset");
  }
  if (auto v = sa.Take("availabilityTimeComplete")) {
    st.availability_time_complete = *v == "true";
  }
  st.extra = sa.Rest();

  const pt::ptree& rep_node = RequireChild(as_node, "Representation", "AdaptationSet");
  Representation& rep = as.representation;
  AttrReader ra(rep_node, "Representation");
  rep.id = ra.Require("id");
  rep.bandwidth = ParseInt(ra.Require("bandwidth"), "bandwidth");
  if (auto v = ra.Take("width")) rep.width = static_cast<int>(ParseInt(*v, "width"));
  if (auto v = ra.Take("height")) rep.height = static_cast<int>(ParseInt(*v, "height"));
  rep.codecs = ra.Take("codecs").value_or("");
  rep.extra = ra.Rest();
  return doc;
}

int64_t SegmentForFrame(int64_t seq, int fps, const MpdConfig& cfg) {
  const int64_t per_segment = std::llround(fps * cfg.segment_duration_s);
  return 1 + seq / per_segment;
}

int64_t AvailabilityTime(int64_t segment_number, const MpdConfig& cfg) {
  if (segment_number < 1) throw Error(ErrorCode::kPrecondition, "segment number < 1");
  const int64_t n = cfg.low_latency ? segment_number - 1 : segment_number;
  return cfg.availability_start_time_us + n * cfg.segment_duration_us();
}

int64_t FragmentAvailabilityTime(int64_t segment_number, int fragment_index,
                                 const MpdConfig& cfg) {
  if (segment_number < 1) throw Error(ErrorCode::kPrecondition, "segment number < 1");
  return cfg.availability_start_time_us + (segment_number - 1) * cfg.segment_duration_us() +
         (fragment_index + 1) * cfg.fragment_duration_us();
}

std::string SegmentPath(int64_t segment_number) {
  return "/seg-" + std::to_string(segment_number) + ".m4s";
}

std::optional<int64_t> ParseSegmentPath(std::string_view path) {
  constexpr std::string_view kPrefix = "/seg-", kSuffix = ".m4s";
  if (path.size() <= kPrefix.size() + kSuffix.size() || !path.starts_with(kPrefix) ||
      !path.ends_with(kSuffix)) {
    return std::nullopt;
  }
  std::string_view digits = path.substr(kPrefix.size(), path.size() - 9);
  int64_t n = 0;
  auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || n < 1) {
    return std::nullopt;
  }
  return n;
}

std::string FormatUtc(int64_t epoch_us) {
  using namespace std::chrono;
  const sys_time<microseconds> tp{microseconds(epoch_us)};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const int64_t in_day = (tp - day).count();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%06lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(in_day / 3'600'000'000),
                static_cast<long long>(in_day / 60'000'000 % 60),
                static_cast<long long>(in_day / 1'000'000 % 60),
                static_cast<long long>(in_day % 1'000'000));
  return buf;
}

int64_t ParseUtc(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0;
  double s = 0;
  char z = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%d-%u-%uT%u:%u:%lf%c", &y, &mo, &d, &h, &mi, &s, &z) != 7 ||
      z != 'Z') {
    throw MalformedError("bad dateTime '" + str + "'", 0);
  }
  const year_month_day ymd{year(y), month(mo), day(d)};
  if (!ymd.ok()) throw MalformedError("bad date '" + str + "'", 0);
  const int64_t days_us = duration_cast<microseconds>(sys_days(ymd).time_since_epoch()).count();
  return days_us + (int64_t{h} * 3600 + mi * 60) * 1'000'000 + std::llround(s * 1e6);
}

std::string FormatDuration(double seconds) {
  return "PT" + FormatDouble(seconds) + "S";
}

double ParseDuration(std::string_view text) {
  if (!text.starts_with("PT")) throw MalformedError("bad duration '" + std::string(text) + "'", 0);
  text.remove_prefix(2);
  double total = 0;
  while (!text.empty()) {
    std::size_t i = 0;
    while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
      ++i;
    }
    if (i == 0 || i == text.size()) {
      throw MalformedError("bad duration component", 0);
    }
    const double v = ParseDouble(text.substr(0, i), "duration");
    switch (text[i]) {
      case 'H': total += v * 3600; break;
      case 'M': total += v * 60; break;
      case 'S': total += v; break;
      default: throw MalformedError("bad duration unit", 0);
    }
    text.remove_prefix(i + 1);
  }
  return total;
}

}  // namespace rrsb::dash
