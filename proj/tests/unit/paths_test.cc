#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>

#include "gtest/gtest.h"
#include "rrsb/common/error.h"
#include "rrsb/dash/mpd.h"
#include "rrsb/http/http.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/media/encoder.h"
#include "rrsb/netem/channel.h"
#include "rrsb/netem/profile.h"
#include "rrsb/paths/origin.h"
#include "rrsb/paths/packager.h"
#include "rrsb/paths/run_path.h"
#include "rrsb/sim/event_loop.h"
#include "rrsb/smt/connection.h"

namespace rrsb::paths {
namespace {

constexpr int64_t kFrameUs = 1'000'000 / 60;

media::AccessUnit Au(int64_t seq) {
  return media::MakeAccessUnit(media::EncoderConfig{}, 1, seq, seq * kFrameUs);
}

double MeanMs(const RunResult& r) {
  double sum = 0;
  for (const auto& s : r.samples) sum += static_cast<double>(s.latency_us);
  return sum / static_cast<double>(r.samples.size()) / 1000.0;
}

TEST(PathNameTest, RoundTrip) {
  for (ProtocolPath p : kAllPaths) EXPECT_EQ(ParsePath(PathName(p)), p);
  EXPECT_THROW(ParsePath("webrtc"), Error);
}

TEST(RtpPackagerTest, SequenceContinuesAcrossAus) {
  RtpPackager packager(1200, 65530);
  auto first = packager.Package(Au(0));  // keyframe, 44642 bytes
  auto second = packager.Package(Au(1));
  ASSERT_EQ(first.size(), (44642u + 1199) / 1200);
  EXPECT_EQ(first.front().header.seq, 65530);
  EXPECT_EQ(second.front().header.seq,
            static_cast<uint16_t>(65530 + first.size()));
  EXPECT_TRUE(first.back().header.marker);
  EXPECT_EQ(first.front().header.payload_type, kRtpPayloadType);
}

TEST(SegmentPackagerTest, DashEmitsOneFragmentPerSegment) {
  dash::MpdConfig cfg;
  SegmentPackager packager(cfg);
  std::vector<PackagedFragment> out;
  for (int64_t seq = 0; seq < 240; ++seq) {
    for (auto& f : packager.Add(Au(seq))) out.push_back(std::move(f));
  }
  ASSERT_EQ(out.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(out[i].segment_number, i + 1);
    EXPECT_TRUE(out[i].segment_complete);
    auto parsed = isobmff::ParseFragment(out[i].bytes);
    EXPECT_EQ(parsed.payloads.size(), 120u);
    EXPECT_EQ(parsed.base_dts_90k, media::PtsForFrame(120 * i, 60));
  }
  EXPECT_TRUE(packager.Flush().empty());
}

TEST(SegmentPackagerTest, LowLatencyEmitsFragments) {
  dash::MpdConfig cfg;
  cfg.low_latency = true;
  SegmentPackager packager(cfg);
  std::vector<PackagedFragment> out;
  for (int64_t seq = 0; seq < 130; ++seq) {
    for (auto& f : packager.Add(Au(seq))) out.push_back(std::move(f));
  }
  ASSERT_EQ(out.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out[i].segment_number, 1);
    EXPECT_EQ(out[i].fragment_index, i);
    EXPECT_EQ(out[i].segment_complete, i == 3);
    EXPECT_EQ(isobmff::ParseFragment(out[i].bytes).payloads.size(), 30u);
  }
  auto tail = packager.Flush();
  ASSERT_EQ(tail.size(), 1u);
  EXPECT_EQ(tail[0].segment_number, 2);
  EXPECT_TRUE(tail[0].segment_complete);
  EXPECT_EQ(isobmff::ParseFragment(tail[0].bytes).payloads.size(), 10u);
  EXPECT_THROW(packager.Add(Au(5)), Error);
}

TEST(PipeAdapterTest, ReturnsIdenticalAus) {
  PipeAdapter pipe;
  for (int64_t seq = 0; seq < 12; ++seq) {
    media::AccessUnit au = Au(seq);
    EXPECT_EQ(pipe.Pass(au), au);
  }
  EXPECT_GT(pipe.bytes(), 44642);
}

// Origin on a server connection, a test client on the other side. The origin
// clock is the scheduler clock and the stream starts at zero.
class OriginHarness {
 public:
  explicit OriginHarness(bool low_latency)
      : fwd_(&sched, netem::ZeroImpairment()),
        rev_(&sched, netem::ZeroImpairment()),
        origin_conn_(&sched, &fwd_, ServerConfig()),
        client_conn_(&sched, &rev_) {
    cfg.low_latency = low_latency;
    origin = std::make_unique<LiveOrigin>(&origin_conn_, cfg,
                                          isobmff::BuildInitSegment({}),
                                          [this] { return sched.Now(); });
    packager_.emplace(cfg);
    origin_conn_.Attach(&rev_, [this](smt::SmtEvent&& e) {
      if (e.kind == smt::SmtEvent::Kind::kStreamData) origin->OnStreamData(e.stream_id, e.data);
    });
    client_conn_.Attach(&fwd_, [this](smt::SmtEvent&& e) {
      if (e.kind != smt::SmtEvent::Kind::kStreamData) return;
      Response& r = responses[e.stream_id];
      for (auto& ev : r.parser.Feed(e.data)) {
        if (ev.kind == http::ResponseEvent::Kind::kHead) r.status = ev.status;
        if (ev.kind == http::ResponseEvent::Kind::kBody) {
          r.body.insert(r.body.end(), ev.data.begin(), ev.data.end());
          r.chunks.push_back({std::move(ev.data), sched.Now()});
        }
        if (ev.kind == http::ResponseEvent::Kind::kDone) r.done_at = sched.Now();
      }
    });
    for (int64_t seq = 0; seq < 600; ++seq) {
      sched.PostAt(seq * kFrameUs + 3500, [this, seq] {
        for (const auto& f : packager_->Add(Au(seq))) origin->AddFragment(f);
      });
    }
  }

  static smt::SmtConfig ServerConfig() {
    smt::SmtConfig c;
    c.server = true;
    return c;
  }

  uint32_t GetAt(int64_t at_us, const std::string& path) {
    sched.RunUntil(at_us);
    const uint32_t id = client_conn_.OpenStream();
    client_conn_.StreamSend(id, http::SerializeRequest({"GET", path}), true);
    return id;
  }

  struct Response {
    http::ResponseParser parser;
    int status = 0;
    Bytes body;
    std::vector<std::pair<Bytes, int64_t>> chunks;
    std::optional<int64_t> done_at;
  };

  sim::VirtualScheduler sched;
  dash::MpdConfig cfg;
  std::unique_ptr<LiveOrigin> origin;
  std::map<uint32_t, Response> responses;

 private:
  netem::SimChannel fwd_, rev_;
  smt::SmtConnection origin_conn_, client_conn_;
  std::optional<SegmentPackager> packager_;
};

TEST(OriginTest, DashSegmentIsNotFoundUntilComplete) {
  OriginHarness h(false);
  const uint32_t early = h.GetAt(1'000'000, dash::SegmentPath(1));
  const uint32_t late = h.GetAt(2'100'000, dash::SegmentPath(1));
  h.sched.RunUntil(3'000'000);
  EXPECT_EQ(h.responses[early].status, 404);
  ASSERT_EQ(h.responses[late].status, 200);
  auto frags = isobmff::ParseSegment(h.responses[late].body);
  ASSERT_EQ(frags.size(), 1u);
  EXPECT_EQ(frags[0].payloads.size(), 120u);
}

// The first fragment's last frame is packaged at 29 frame intervals + 3.5 ms,
// so the first chunk lands close to the 0.5 s fragment boundary.
TEST(OriginTest, LowLatencySegmentStreamsFragments) {
  OriginHarness h(true);
  const uint32_t id = h.GetAt(100'000, dash::SegmentPath(1));
  const uint32_t ahead = h.GetAt(100'000, dash::SegmentPath(3));
  h.sched.RunUntil(3'000'000);
  const auto& r = h.responses[id];
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.chunks.size(), 4u);
  const int64_t first_ready = 29 * kFrameUs + 3500;
  EXPECT_GT(r.chunks[0].second, first_ready);
  EXPECT_NEAR(static_cast<double>(r.chunks[0].second),
              static_cast<double>(dash::FragmentAvailabilityTime(1, 0, h.cfg)), 20'000);
  for (int k = 1; k < 4; ++k) {
    EXPECT_NEAR(static_cast<double>(r.chunks[k].second - r.chunks[k - 1].second), 500'000, 1000);
    EXPECT_EQ(isobmff::ParseFragment(r.chunks[k].first).payloads.size(), 30u);
  }
  ASSERT_TRUE(r.done_at);
  EXPECT_EQ(h.responses[ahead].status, 404);
}

TEST(OriginTest, StaticResourcesAndUnknownPath) {
  OriginHarness h(false);
  const uint32_t mpd = h.GetAt(0, dash::kMpdPath);
  const uint32_t init = h.GetAt(0, dash::kInitPath);
  const uint32_t nope = h.GetAt(0, "/nope");
  h.sched.RunUntil(100'000);
  ASSERT_EQ(h.responses[mpd].status, 200);
  const Bytes& body = h.responses[mpd].body;
  auto doc = dash::ParseMpd(std::string(body.begin(), body.end()));
  EXPECT_EQ(doc, dash::ModelFromConfig(h.cfg));
  EXPECT_EQ(h.responses[init].status, 200);
  EXPECT_EQ(h.responses[init].body, isobmff::BuildInitSegment({}));
  EXPECT_EQ(h.responses[nope].status, 404);
  ASSERT_EQ(h.origin->log().size(), 3u);
  EXPECT_EQ(h.origin->log()[2].path, "/nope");
  EXPECT_EQ(h.origin->log()[2].status, 404);
}

TEST(RunPathTest, ShortDurationIsPrecondition) {
  try {
    RunPath(ProtocolPath::kRtpUdp, netem::ZeroImpairment(), PathConfig{}, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

// Zero-impairment oracle: first packet arrives after encode + package + the
// 2 ms link delay + serialization of a 1212-byte datagram at 300 Mbps; the
// jitter buffer adds its 50 ms target. Clock sync is exact on this link.
TEST(RunPathTest, RtpUdpZeroImpairmentLatency) {
  PathConfig cfg;
  auto r = RunPath(ProtocolPath::kRtpUdp, netem::ZeroImpairment(), cfg, 5, 1);
  ASSERT_EQ(r.samples.size(), 300u);
  EXPECT_EQ(r.lost, 0);
  EXPECT_EQ(r.clock.offset_us, -cfg.receiver_clock_offset_us);
  const int64_t serialization_us = int64_t{1212} * 8 * 1'000'000 / 300'000'000;
  const int64_t expected = cfg.encode_cost_us + cfg.package_cost_us + 2000 + serialization_us +
                           cfg.player.jitter.target_delay_ms * 1000;
  for (const auto& s : r.samples) {
    EXPECT_EQ(s.latency_us, expected) << s.seq;
    EXPECT_LE(std::abs(s.latency_us - (3500 + 50'000)), kFrameUs);
  }
}

// All frames of a segment are captured during it and played back at 1x from
// one anchor, so every frame shares the same latency: the start segment's
// first capture to the playout start. Playout starts once two more segments
// are in, six seconds after the first capture plus the fetch.
TEST(RunPathTest, DashZeroImpairmentBand) {
  auto r = RunPath(ProtocolPath::kDash, netem::ZeroImpairment(), PathConfig{}, 10, 1);
  ASSERT_GT(r.samples.size(), 0u);
  EXPECT_EQ(r.lost + r.skipped + static_cast<int64_t>(r.samples.size()), r.sent);
  const double mean = MeanMs(r);
  EXPECT_GE(mean, 5000);
  EXPECT_LE(mean, 7000);
  for (const auto& s : r.samples) {
    EXPECT_NEAR(static_cast<double>(s.latency_us), mean * 1000, 2.0) << s.seq;
    EXPECT_FALSE(s.rebuffered);
  }
  EXPECT_GE(mean, 6000);
  EXPECT_LE(mean, 6000 + 100 + 200);  // one poll interval plus a segment transfer
}

TEST(RunPathTest, DashFirstDisplayAfterSegmentTwo) {
  auto r = RunPath(ProtocolPath::kDash, netem::ZeroImpairment(), PathConfig{}, 10, 1);
  ASSERT_FALSE(r.samples.empty());
  dash::MpdConfig mpd;
  mpd.availability_start_time_us = r.stream_start_us;
  int64_t first = r.samples.front().display_ts_us;
  for (const auto& s : r.samples) first = std::min(first, s.display_ts_us);
  EXPECT_GE(first, dash::AvailabilityTime(2, mpd));
  // The segment after the start segment plus one more must be buffered.
  EXPECT_GE(first, dash::AvailabilityTime(3, mpd));
}

TEST(RunPathTest, DashFetchesOneSegmentPerSegmentDuration) {
  auto r = RunPath(ProtocolPath::kDash, netem::ZeroImpairment(), PathConfig{}, 20, 1);
  std::vector<int64_t> ok;
  int64_t last_segment = 0;
  for (const auto& f : r.fetches) {
    if (f.status != 200) continue;
    EXPECT_EQ(f.segment, last_segment + 1);
    last_segment = f.segment;
    ok.push_back(f.requested_us);
  }
  ASSERT_EQ(ok.size(), 10u);
  for (std::size_t i = 1; i < ok.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(ok[i] - ok[i - 1]), 2'000'000, 100'000);
  }
}

TEST(RunPathTest, LowLatencyOutageRebuffers) {
  PathConfig cfg;
  cfg.forward_outages.push_back({6'000'000, 9'000'000});
  auto r = RunPath(ProtocolPath::kLlDash, netem::ZeroImpairment(), cfg, 15, 1);
  ASSERT_FALSE(r.rebuffers.empty());
  int64_t stalled = 0;
  for (const auto& e : r.rebuffers) stalled += e.duration_us;
  EXPECT_GE(stalled, 3'000'000 - 1'500'000 - 500'000);
  int64_t flagged = 0;
  for (const auto& s : r.samples) flagged += s.rebuffered ? 1 : 0;
  EXPECT_GT(flagged, 0);
  EXPECT_EQ(r.lost + r.skipped + static_cast<int64_t>(r.samples.size()), r.sent);
  auto json = RunJson(r, cfg);
  EXPECT_EQ(json["counters"]["rebuffer_events"], static_cast<int64_t>(r.rebuffers.size()));
}

TEST(RunPathTest, StageTimesMonotone) {
  for (ProtocolPath p : kAllPaths) {
    auto r = RunPath(p, netem::Profile("wifi"), PathConfig{}, 5, 2);
    ASSERT_EQ(r.stages.size(), 300u) << PathName(p);
    for (const auto& [seq, st] : r.stages) {
      EXPECT_EQ(st.capture_us, r.stream_start_us + seq * 1'000'000 / 60);
      EXPECT_LE(st.capture_us, st.encoded_us);
      EXPECT_LE(st.encoded_us, st.packaged_us);
      EXPECT_LE(st.packaged_us, st.sent_us) << PathName(p) << " " << seq;
    }
  }
}

TEST(RunPathTest, CountersAddUpUnderLoss) {
  for (ProtocolPath p : kAllPaths) {
    auto profile = netem::Profile("fiveg");
    profile.loss_rate = 0.02;
    auto r = RunPath(p, profile, PathConfig{}, 5, 3);
    EXPECT_EQ(r.lost + r.skipped + static_cast<int64_t>(r.samples.size()), r.sent)
        << PathName(p);
    EXPECT_GE(r.lost, 0);
    EXPECT_EQ(r.corrupted, 0);
    for (std::size_t i = 1; i < r.samples.size(); ++i) {
      EXPECT_LT(r.samples[i - 1].seq, r.samples[i].seq);
    }
  }
}

TEST(RunPathTest, PipeIngestMatchesInproc) {
  PathConfig inproc;
  PathConfig pipe;
  pipe.ingest = media::IngestMode::kPipe;
  for (ProtocolPath p : {ProtocolPath::kRtpUdp, ProtocolPath::kLlDash}) {
    auto a = RunPath(p, netem::Profile("wifi"), inproc, 5, 4);
    auto b = RunPath(p, netem::Profile("wifi"), pipe, 5, 4);
    EXPECT_EQ(SamplesCsv(a), SamplesCsv(b)) << PathName(p);
  }
}

TEST(RunPathTest, SameSeedSameCsv) {
  auto profile = netem::Profile("wifi");
  profile.loss_rate = 0.01;
  for (ProtocolPath p : kAllPaths) {
    auto a = RunPath(p, profile, PathConfig{}, 5, 9);
    auto b = RunPath(p, profile, PathConfig{}, 5, 9);
    EXPECT_EQ(SamplesCsv(a), SamplesCsv(b)) << PathName(p);
  }
}

TEST(RunPathTest, MoqWithinOneJitterTargetOfRtpSmt) {
  PathConfig cfg;
  auto moq = RunPath(ProtocolPath::kMoqLite, netem::Profile("wifi"), cfg, 10, 5);
  auto smt = RunPath(ProtocolPath::kRtpSmt, netem::Profile("wifi"), cfg, 10, 5);
  auto clean = netem::Profile("wifi");
  clean.loss_rate = 0;
  auto moq0 = RunPath(ProtocolPath::kMoqLite, clean, cfg, 10, 5);
  auto smt0 = RunPath(ProtocolPath::kRtpSmt, clean, cfg, 10, 5);
  EXPECT_EQ(static_cast<int64_t>(moq0.samples.size()), moq0.sent);
  EXPECT_LE(std::abs(MeanMs(moq0) - MeanMs(smt0)), cfg.player.jitter.target_delay_ms);
  EXPECT_LE(MeanMs(moq), MeanMs(smt));
}

TEST(RunPathTest, OutputsWritten) {
  auto r = RunPath(ProtocolPath::kRtpUdp, netem::Profile("wifi"), PathConfig{}, 5, 1);
  const auto dir = std::filesystem::temp_directory_path() /
                   ("rrsb_outputs_" + std::to_string(::getpid()));
  WriteRunOutputs(r, PathConfig{}, dir.string());
  std::ifstream csv(dir / "samples.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "seq,capture_us,display_us,latency_us");
  std::ifstream json_file(dir / "run.json");
  auto json = nlohmann::json::parse(json_file);
  EXPECT_EQ(json["path"], "rtp-udp");
  EXPECT_EQ(json["counters"]["sent"], 300);
  EXPECT_EQ(json["counters"]["delivered"].get<int64_t>() + json["counters"]["lost"].get<int64_t>() +
                json["counters"]["skipped"].get<int64_t>(),
            300);
  std::filesystem::remove_all(dir);
}

TEST(RunPathTest, RealtimeLoopbackSmoke) {
  PathConfig cfg;
  cfg.realtime = true;
  auto r = RunPath(ProtocolPath::kRtpUdp, netem::Profile("wifi"), cfg, 5, 1);
  EXPECT_GT(r.samples.size(), 270u);
  EXPECT_EQ(r.lost + r.skipped + static_cast<int64_t>(r.samples.size()), r.sent);
  const double mean = MeanMs(r);
  EXPECT_GT(mean, 50);
  EXPECT_LT(mean, 150);
}

}  // namespace
}  // namespace rrsb::paths
