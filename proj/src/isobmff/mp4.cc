#include "rrsb/isobmff/mp4.h"

#include <array>
#include <cstring>
#include <optional>

#include "rrsb/common/error.h"

namespace rrsb::isobmff {
namespace {

constexpr uint32_t kTrunDataOffset = 0x000001;
constexpr uint32_t kTrunDuration = 0x000100;
constexpr uint32_t kTrunSize = 0x000200;
constexpr uint32_t kTrunFlags = 0x000400;
constexpr uint32_t kTfhdDefaultBaseIsMoof = 0x020000;
constexpr uint32_t kSyncSampleFlags = 0x02000000;
constexpr uint32_t kNonSyncSampleFlags = 0x01010000;
constexpr std::array<uint32_t, 9> kUnityMatrix = {0x00010000, 0, 0, 0, 0x00010000,
                                                  0,          0, 0, 0x40000000};

class BoxScope {
 public:
  BoxScope(ByteWriter& w, std::string_view type) : w_(w), start_(w.size()) {
    w_.U32(0);
    w_.Append(type);
  }
  BoxScope(ByteWriter& w, std::string_view type, uint8_t version, uint32_t flags)
      : BoxScope(w, type) {
    w_.U32((uint32_t{version} << 24) | (flags & 0xffffff));
  }
  ~BoxScope() { w_.PatchU32(start_, static_cast<uint32_t>(w_.size() - start_)); }

 private:
  ByteWriter& w_;
  std::size_t start_;
};

void WriteMatrix(ByteWriter& w) {
  for (uint32_t v : kUnityMatrix) w.U32(v);
}

void WriteEmptyTable(ByteWriter& w, std::string_view type) {
  BoxScope box(w, type, 0, 0);
  w.U32(0);
}

struct RawBox {
  std::string type;
  std::size_t offset;  // absolute
  ByteView body;       // content after the 8-byte header
};

// Reads the box at the reader position. Offsets are absolute.
RawBox ReadBox(ByteReader& r) {
  const std::size_t offset = r.absolute_position();
  if (r.remaining() < 8) throw MalformedError("truncated box header", offset);
  const uint32_t size = r.U32();
  ByteView type = r.Take(4);
  if (size < 8) throw MalformedError("box size below header size", offset);
  if (size - 8 > r.remaining()) throw MalformedError("box overruns its container", offset);
  RawBox box{std::string(type.begin(), type.end()), offset, r.Take(size - 8)};
  return box;
}

std::vector<RawBox> ReadChildren(const RawBox& parent) {
  ByteReader r(parent.body, parent.offset + 8);
  std::vector<RawBox> out;
  while (!r.empty()) out.push_back(ReadBox(r));
  return out;
}

bool IsKnownTopLevel(const std::string& type) {
  return type == "ftyp" || type == "styp" || type == "moov" || type == "moof" ||
         type == "mdat";
}

ParsedFragment ParseMoof(const RawBox& moof, const RawBox* mdat) {
  ParsedFragment f;
  bool have_mfhd = false, have_tfdt = false, have_trun = false;
  int64_t data_offset = 0;
  for (const RawBox& child : ReadChildren(moof)) {
    if (child.type == "mfhd") {
      ByteReader r(child.body, child.offset + 8);
      r.U32();
      f.sequence_number = r.U32();
      have_mfhd = true;
    } else if (child.type == "traf") {
      for (const RawBox& t : ReadChildren(child)) {
        ByteReader r(t.body, t.offset + 8);
        if (t.type == "tfhd") {
          r.U32();
          r.U32();
        } else if (t.type == "tfdt") {
          const uint8_t version = static_cast<uint8_t>(r.U32() >> 24);
          f.base_dts_90k = version == 1 ? static_cast<int64_t>(r.U64()) : r.U32();
          have_tfdt = true;
        } else if (t.type == "trun") {
          const uint32_t flags = r.U32() & 0xffffff;
          const uint32_t count = r.U32();
          if (flags & kTrunDataOffset) data_offset = static_cast<int32_t>(r.U32());
          if (flags & 0x000004) r.U32();  // first-sample-flags
          for (uint32_t i = 0; i < count; ++i) {
            f.durations.push_back(flags & kTrunDuration ? r.U32() : 0);
            f.sizes.push_back(flags & kTrunSize ? r.U32() : 0);
            const uint32_t sflags = flags & kTrunFlags ? r.U32() : kSyncSampleFlags;
            f.keyframes.push_back((sflags & 0x00010000) == 0);
            if (flags & 0x000800) r.U32();  // composition offset
          }
          have_trun = true;
        } else {
          throw MalformedError("unknown box '" + t.type + "' in traf", t.offset);
        }
      }
    } else {
      throw MalformedError("unknown box '" + child.type + "' in moof", child.offset);
    }
  }
  if (!have_mfhd || !have_tfdt || !have_trun) {
    throw MalformedError("moof lacks mfhd/tfdt/trun", moof.offset);
  }
  if (mdat == nullptr) throw MalformedError("moof without mdat", moof.offset);
  // Payload range relative to the mdat body, with base = start of moof.
  const int64_t body_start = static_cast<int64_t>(mdat->offset + 8);
  int64_t pos = static_cast<int64_t>(moof.offset) + data_offset - body_start;
  for (uint32_t size : f.sizes) {
    if (pos < 0 || pos + size > static_cast<int64_t>(mdat->body.size())) {
      throw MalformedError("sample outside mdat", mdat->offset);
    }
    auto begin = mdat->body.begin() + pos;
    f.payloads.emplace_back(begin, begin + size);
    pos += size;
  }
  return f;
}

// Splits top-level boxes into fragments (moof followed by mdat).
std::vector<ParsedFragment> ParseTopLevel(ByteView data) {
  ByteReader r(data);
  std::vector<RawBox> boxes;
  while (!r.empty()) {
    RawBox box = ReadBox(r);
    if (!IsKnownTopLevel(box.type)) {
      throw MalformedError("unknown top-level box '" + box.type + "'", box.offset);
    }
    boxes.push_back(box);
  }
  std::vector<ParsedFragment> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].type != "moof") continue;
    const RawBox* mdat =
        i + 1 < boxes.size() && boxes[i + 1].type == "mdat" ? &boxes[i + 1] : nullptr;
    out.push_back(ParseMoof(boxes[i], mdat));
  }
  return out;
}

}  // namespace

Bytes BuildInitSegment(const TrackConfig& cfg) {
  ByteWriter w;
  {
    BoxScope ftyp(w, "ftyp");
    w.Append("iso6");
    w.U32(0);
    w.Append("iso6");
    w.Append("dash");
    w.Append("mp41");
  }
  {
    BoxScope moov(w, "moov");
    {
      BoxScope mvhd(w, "mvhd", 0, 0);
      w.U32(0);
      w.U32(0);
      w.U32(cfg.timescale);
      w.U32(0);
      w.U32(0x00010000);
      w.U16(0x0100);
      w.Zeros(10);
      WriteMatrix(w);
      w.Zeros(24);
      w.U32(cfg.track_id + 1);
    }
    {
      BoxScope trak(w, "trak");
      {
        BoxScope tkhd(w, "tkhd", 0, 0x000003);
        w.U32(0);
        w.U32(0);
        w.U32(cfg.track_id);
        w.U32(0);
        w.U32(0);
        w.Zeros(8);
        w.U16(0);
        w.U16(0);
        w.U16(0);
        w.U16(0);
        WriteMatrix(w);
        w.U32(static_cast<uint32_t>(cfg.width) << 16);
        w.U32(static_cast<uint32_t>(cfg.height) << 16);
      }
      BoxScope mdia(w, "mdia");
      {
        BoxScope mdhd(w, "mdhd", 0, 0);
        w.U32(0);
        w.U32(0);
        w.U32(cfg.timescale);
        w.U32(0);
        w.U16(0x55c4);  // "und"
        w.U16(0);
      }
      {
        BoxScope hdlr(w, "hdlr", 0, 0);
        w.U32(0);
        w.Append("vide");
        w.Zeros(12);
        w.Append("VideoHandler");
        w.U8(0);
      }
      BoxScope minf(w, "minf");
      {
        BoxScope vmhd(w, "vmhd", 0, 1);
        w.Zeros(8);
      }
      {
        BoxScope dinf(w, "dinf");
        BoxScope dref(w, "dref", 0, 0);
        w.U32(1);
        BoxScope url(w, "url ", 0, 1);
      }
      BoxScope stbl(w, "stbl");
      WriteEmptyTable(w, "stsd");
      WriteEmptyTable(w, "stts");
      WriteEmptyTable(w, "stsc");
      {
        BoxScope stsz(w, "stsz", 0, 0);
        w.U32(0);
        w.U32(0);
      }
      WriteEmptyTable(w, "stco");
    }
    {
      BoxScope mvex(w, "mvex");
      BoxScope trex(w, "trex", 0, 0);
      w.U32(cfg.track_id);
      w.U32(1);
      w.U32(0);
      w.U32(0);
      w.U32(0);
    }
  }
  return w.Take();
}

std::vector<BoxInfo> ParseBoxes(ByteView data) {
  ByteReader r(data);
  std::vector<BoxInfo> out;
  while (!r.empty()) {
    RawBox box = ReadBox(r);
    out.push_back(BoxInfo{box.type, box.offset, box.body.size() + 8});
  }
  return out;
}

MediaFragment BuildFragment(std::span<const media::AccessUnit> aus,
                            uint32_t sequence_number, int fps) {
  if (aus.empty()) throw Error(ErrorCode::kPrecondition, "fragment needs at least one AU");
  if (fps <= 0) throw Error(ErrorCode::kPrecondition, "fps must be positive");
  for (std::size_t i = 1; i < aus.size(); ++i) {
    if (aus[i].seq != aus[i - 1].seq + 1 || aus[i].pts_90k <= aus[i - 1].pts_90k) {
      throw Error(ErrorCode::kPrecondition, "fragment AUs must be contiguous");
    }
  }
  std::vector<uint32_t> durations(aus.size());
  for (std::size_t i = 0; i < aus.size(); ++i) {
    const int64_t next_pts = i + 1 < aus.size()
                                 ? aus[i + 1].pts_90k
                                 : aus[i].pts_90k + media::PtsForFrame(aus[i].seq + 1, fps) -
                                       media::PtsForFrame(aus[i].seq, fps);
    durations[i] = static_cast<uint32_t>(next_pts - aus[i].pts_90k);
  }

  MediaFragment frag;
  frag.sequence_number = sequence_number;
  frag.base_dts_90k = aus.front().pts_90k;
  for (uint32_t d : durations) frag.duration_90k += d;

  ByteWriter w;
  {
    BoxScope styp(w, "styp");
    w.Append("msdh");
    w.U32(0);
    w.Append("msdh");
    w.Append("msix");
  }
  const std::size_t moof_start = w.size();
  std::size_t data_offset_pos = 0;
  {
    BoxScope moof(w, "moof");
    {
      BoxScope mfhd(w, "mfhd", 0, 0);
      w.U32(sequence_number);
    }
    BoxScope traf(w, "traf");
    {
      BoxScope tfhd(w, "tfhd", 0, kTfhdDefaultBaseIsMoof);
      w.U32(1);
    }
    {
      BoxScope tfdt(w, "tfdt", 1, 0);
      w.U64(static_cast<uint64_t>(frag.base_dts_90k));
    }
    BoxScope trun(w, "trun", 0, kTrunDataOffset | kTrunDuration | kTrunSize | kTrunFlags);
    w.U32(static_cast<uint32_t>(aus.size()));
    data_offset_pos = w.size();
    w.U32(0);
    for (std::size_t i = 0; i < aus.size(); ++i) {
      w.U32(durations[i]);
      w.U32(static_cast<uint32_t>(aus[i].payload.size()));
      w.U32(aus[i].keyframe ? kSyncSampleFlags : kNonSyncSampleFlags);
    }
  }
  const std::size_t moof_size = w.size() - moof_start;
  w.PatchU32(data_offset_pos, static_cast<uint32_t>(moof_size + 8));
  {
    BoxScope mdat(w, "mdat");
    for (const auto& au : aus) w.Append(au.payload);
  }
  frag.bytes = w.Take();
  return frag;
}

int64_t ParsedFragment::duration_90k() const {
  int64_t total = 0;
  for (uint32_t d : durations) total += d;
  return total;
}

ParsedFragment ParseFragment(ByteView data) {
  auto fragments = ParseTopLevel(data);
  if (fragments.empty()) throw Error(ErrorCode::kNoSamples, "no moof in input");
  if (fragments.size() > 1) throw MalformedError("more than one fragment", 0);
  return std::move(fragments.front());
}

std::vector<ParsedFragment> ParseSegment(ByteView data) {
  auto fragments = ParseTopLevel(data);
  if (fragments.empty()) throw Error(ErrorCode::kNoSamples, "no moof in segment");
  return fragments;
}

std::vector<ParsedFragment> FragmentAssembler::Feed(ByteView data) {
  buffer_.insert(buffer_.end(), data.begin(), data.end());
  std::vector<ParsedFragment> out;
  while (buffer_.size() - scan_ >= 8) {
    const uint32_t size = ReadU32At(buffer_, scan_);
    const std::string type(buffer_.begin() + static_cast<std::ptrdiff_t>(scan_ + 4),
                           buffer_.begin() + static_cast<std::ptrdiff_t>(scan_ + 8));
    if (size < 8) throw MalformedError("box size below header size", scan_);
    if (!IsKnownTopLevel(type)) {
      throw MalformedError("unknown top-level box '" + type + "'", scan_);
    }
    if (buffer_.size() - scan_ < size) break;
    scan_ += size;
    if (type == "ftyp" || type == "moov") {
      fragment_start_ = scan_;
    } else if (type == "mdat") {
      ByteView frag(buffer_.data() + fragment_start_, scan_ - fragment_start_);
      for (auto& f : ParseTopLevel(frag)) out.push_back(std::move(f));
      fragment_start_ = scan_;
    }
  }
  if (fragment_start_ > 0 && fragment_start_ == scan_) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(scan_));
    fragment_start_ = scan_ = 0;
  }
  return out;
}

}  // namespace rrsb::isobmff
