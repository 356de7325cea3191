#include <random>

#include "gtest/gtest.h"
#include "rrsb/common/error.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/media/encoder.h"

namespace rrsb::isobmff {
namespace {

std::vector<media::AccessUnit> MakeAus(int64_t first_seq, const std::vector<std::size_t>& sizes,
                                       int fps = 60) {
  std::vector<media::AccessUnit> aus;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    media::AccessUnit au;
    au.seq = first_seq + static_cast<int64_t>(i);
    au.pts_90k = media::PtsForFrame(au.seq, fps);
    au.dts_90k = au.pts_90k;
    au.keyframe = au.seq % 5 == 0;
    au.payload.resize(sizes[i]);
    for (std::size_t b = 0; b < sizes[i]; ++b) au.payload[b] = static_cast<uint8_t>(b ^ au.seq);
    aus.push_back(std::move(au));
  }
  return aus;
}

std::vector<std::string> Types(const std::vector<BoxInfo>& boxes) {
  std::vector<std::string> out;
  for (const auto& b : boxes) out.push_back(b.type);
  return out;
}

// Independent walker: finds a box by path, reading sizes byte by byte.
std::size_t FindBox(const Bytes& data, std::size_t begin, std::size_t end,
                    const std::string& type) {
  std::size_t pos = begin;
  while (pos + 8 <= end) {
    const std::size_t size = (std::size_t{data[pos]} << 24) | (std::size_t{data[pos + 1]} << 16) |
                             (std::size_t{data[pos + 2]} << 8) | data[pos + 3];
    if (std::string(data.begin() + pos + 4, data.begin() + pos + 8) == type) return pos;
    pos += size;
  }
  return std::string::npos;
}

TEST(InitSegmentTest, StartsWithFtyp) {
  Bytes init = BuildInitSegment();
  ASSERT_GE(init.size(), 8u);
  EXPECT_EQ(std::string(init.begin() + 4, init.begin() + 8), "ftyp");
  EXPECT_EQ(ReadU32At(init, 0), 28u);  // header + brand + version + 3 compatible brands
}

TEST(InitSegmentTest, TopLevelBoxes) {
  Bytes init = BuildInitSegment();
  EXPECT_EQ(Types(ParseBoxes(init)), (std::vector<std::string>{"ftyp", "moov"}));
}

TEST(InitSegmentTest, Deterministic) {
  TrackConfig cfg;
  cfg.width = 1280;
  cfg.height = 720;
  EXPECT_EQ(BuildInitSegment(cfg), BuildInitSegment(cfg));
  EXPECT_NE(BuildInitSegment(cfg), BuildInitSegment());
}

TEST(InitSegmentTest, ContainsListedBoxes) {
  Bytes init = BuildInitSegment();
  auto moov = FindBox(init, 0, init.size(), "moov");
  ASSERT_NE(moov, std::string::npos);
  const std::size_t moov_end = moov + ReadU32At(init, moov);
  EXPECT_NE(FindBox(init, moov + 8, moov_end, "mvhd"), std::string::npos);
  EXPECT_NE(FindBox(init, moov + 8, moov_end, "mvex"), std::string::npos);
  auto trak = FindBox(init, moov + 8, moov_end, "trak");
  ASSERT_NE(trak, std::string::npos);
  const std::size_t trak_end = trak + ReadU32At(init, trak);
  EXPECT_NE(FindBox(init, trak + 8, trak_end, "tkhd"), std::string::npos);
  auto mdia = FindBox(init, trak + 8, trak_end, "mdia");
  ASSERT_NE(mdia, std::string::npos);
  const std::size_t mdia_end = mdia + ReadU32At(init, mdia);
  EXPECT_NE(FindBox(init, mdia + 8, mdia_end, "mdhd"), std::string::npos);
  EXPECT_NE(FindBox(init, mdia + 8, mdia_end, "hdlr"), std::string::npos);
  auto minf = FindBox(init, mdia + 8, mdia_end, "minf");
  ASSERT_NE(minf, std::string::npos);
  const std::size_t minf_end = minf + ReadU32At(init, minf);
  for (const char* t : {"vmhd", "dinf", "stbl"}) {
    EXPECT_NE(FindBox(init, minf + 8, minf_end, t), std::string::npos) << t;
  }
}

TEST(InitSegmentTest, ParseFragmentReportsNoSamples) {
  try {
    ParseFragment(BuildInitSegment());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoSamples);
  }
}

TEST(FragmentTest, MdatSizeForSingleAu) {
  auto aus = MakeAus(0, {1488});
  auto frag = BuildFragment(aus, 1, 60);
  auto boxes = ParseBoxes(frag.bytes);
  ASSERT_EQ(Types(boxes), (std::vector<std::string>{"styp", "moof", "mdat"}));
  EXPECT_EQ(boxes[2].size, 1496u);
  EXPECT_EQ(ReadU32At(frag.bytes, boxes[2].offset), 1496u);
}

TEST(FragmentTest, TfdtIsFirstPts) {
  auto aus = MakeAus(30, {100, 200});
  auto frag = BuildFragment(aus, 7, 60);
  EXPECT_EQ(frag.base_dts_90k, 45000);
  auto parsed = ParseFragment(frag.bytes);
  EXPECT_EQ(parsed.base_dts_90k, 45000);
  EXPECT_EQ(parsed.sequence_number, 7u);
}

TEST(FragmentTest, ThirtyAusSpanHalfSecond) {
  auto aus = MakeAus(0, std::vector<std::size_t>(30, 50));
  auto frag = BuildFragment(aus, 1, 60);
  EXPECT_EQ(frag.duration_90k, 45000);
  EXPECT_EQ(ParseFragment(frag.bytes).duration_90k(), 45000);
}

TEST(FragmentTest, EmptyListRejected) {
  std::vector<media::AccessUnit> none;
  EXPECT_THROW(BuildFragment(none, 1, 60), Error);
}

TEST(FragmentTest, KeyframeFlags) {
  auto aus = MakeAus(0, {10, 10, 10, 10, 10, 10});
  auto parsed = ParseFragment(BuildFragment(aus, 1, 60).bytes);
  EXPECT_EQ(parsed.keyframes, (std::vector<bool>{true, false, false, false, false, true}));
}

TEST(FragmentTest, CorruptedSizeReportsOffset) {
  auto frag = BuildFragment(MakeAus(0, {300, 300}), 1, 60);
  auto boxes = ParseBoxes(frag.bytes);
  Bytes bad = frag.bytes;
  const std::size_t mdat = boxes[2].offset;
  bad[mdat] = 0x7f;  // mdat size now overruns the input
  try {
    ParseFragment(bad);
    FAIL();
  } catch (const MalformedError& e) {
    EXPECT_EQ(e.offset(), mdat);
  }
}

TEST(FragmentTest, TruncatedInputIsMalformed) {
  auto frag = BuildFragment(MakeAus(0, {300}), 1, 60);
  Bytes cut(frag.bytes.begin(), frag.bytes.end() - 5);
  EXPECT_THROW(ParseBoxes(cut), MalformedError);
  EXPECT_THROW(ParseFragment(cut), MalformedError);
}

TEST(FragmentTest, UnknownBoxIsMalformed) {
  auto frag = BuildFragment(MakeAus(0, {300}), 1, 60);
  Bytes bad = frag.bytes;
  bad[4] = 'x';
  try {
    ParseFragment(bad);
    FAIL();
  } catch (const MalformedError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

// Fuzzed AU size lists: payloads, order, sizes, tfdt and box sizes survive.
TEST(FragmentTest, FuzzedRoundTrip) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int fps = trial % 3 == 0 ? 30 : (trial % 3 == 1 ? 60 : 7);
    std::vector<std::size_t> sizes(1 + rng() % 40);
    for (auto& s : sizes) s = rng() % 5000;
    const int64_t first = static_cast<int64_t>(rng() % 100000);
    auto aus = MakeAus(first, sizes, fps);
    auto frag = BuildFragment(aus, static_cast<uint32_t>(trial), fps);

    auto boxes = ParseBoxes(frag.bytes);
    std::size_t tiled = 0;
    for (const auto& b : boxes) {
      EXPECT_EQ(ReadU32At(frag.bytes, b.offset), b.size);
      tiled += b.size;
    }
    ASSERT_EQ(tiled, frag.bytes.size());

    auto parsed = ParseFragment(frag.bytes);
    ASSERT_EQ(parsed.payloads.size(), aus.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < aus.size(); ++i) {
      ASSERT_EQ(parsed.payloads[i], aus[i].payload);
      ASSERT_EQ(parsed.sizes[i], aus[i].payload.size());
      total += aus[i].payload.size();
    }
    EXPECT_EQ(boxes.back().size, total + 8);
    EXPECT_EQ(parsed.base_dts_90k, aus.front().pts_90k);
    EXPECT_EQ(parsed.duration_90k(),
              media::PtsForFrame(first + static_cast<int64_t>(sizes.size()), fps) -
                  media::PtsForFrame(first, fps));
  }
}

TEST(SegmentTest, ParsesConsecutiveFragments) {
  Bytes segment;
  for (int k = 0; k < 4; ++k) {
    auto frag = BuildFragment(MakeAus(30 * k, std::vector<std::size_t>(30, 20)), k + 1, 60);
    segment.insert(segment.end(), frag.bytes.begin(), frag.bytes.end());
  }
  auto frags = ParseSegment(segment);
  ASSERT_EQ(frags.size(), 4u);
  EXPECT_EQ(frags[3].base_dts_90k, 135000);
}

TEST(FragmentAssemblerTest, ArbitraryChunking) {
  Bytes stream = BuildInitSegment();
  std::vector<MediaFragment> built;
  for (int k = 0; k < 5; ++k) {
    built.push_back(BuildFragment(MakeAus(10 * k, std::vector<std::size_t>(10, 333)), k, 60));
    stream.insert(stream.end(), built.back().bytes.begin(), built.back().bytes.end());
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    FragmentAssembler assembler;
    std::vector<ParsedFragment> got;
    std::size_t pos = 0;
    while (pos < stream.size()) {
      std::size_t n = std::min<std::size_t>(stream.size() - pos, 1 + rng() % 2000);
      for (auto& f : assembler.Feed(ByteView(stream).subspan(pos, n))) got.push_back(f);
      pos += n;
    }
    ASSERT_EQ(got.size(), built.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].base_dts_90k, built[k].base_dts_90k);
    }
    EXPECT_EQ(assembler.buffered(), 0u);
  }
}

TEST(FragmentTest, CarriesEncoderAus) {
  media::EncoderConfig cfg;
  media::MockEncoder enc(cfg, 9);
  std::vector<media::AccessUnit> aus;
  media::VideoConfig video;
  video.width = 64;
  video.height = 64;
  for (int64_t s = 0; s < 10; ++s) aus.push_back(enc.Encode(media::SynthesizeFrame(s, video, s)));
  auto parsed = ParseFragment(BuildFragment(aus, 1, cfg.fps).bytes);
  for (std::size_t i = 0; i < aus.size(); ++i) EXPECT_EQ(parsed.payloads[i], aus[i].payload);
}

}  // namespace
}  // namespace rrsb::isobmff
