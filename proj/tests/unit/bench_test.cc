#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "gtest/gtest.h"
#include "rrsb/bench/bench.h"
#include "rrsb/common/error.h"

namespace rrsb::bench {
namespace {

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          (name + "_" + std::to_string(::getpid())))
      .string();
}

TEST(StatsTest, ThreeSamples) {
  LatencyStats s = ComputeStats({100, 110, 120}, 2, 1);
  EXPECT_DOUBLE_EQ(s.avg_ms, 110);
  EXPECT_DOUBLE_EQ(s.dev_ms, 10);
  EXPECT_EQ(s.n, 3);
  EXPECT_EQ(s.skipped, 2);
  EXPECT_EQ(s.lost, 1);
}

TEST(StatsTest, NoSamplesIsInvalidRun) {
  try {
    ComputeStats({}, 0, 300);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidRun);
  }
}

TEST(StatsTest, SingleSampleHasZeroDeviation) {
  LatencyStats s = ComputeStats({42.5}, 0, 0);
  EXPECT_EQ(s.dev_ms, 0);
  EXPECT_EQ(s.p95_ms, 42.5);
}

// Oracle: (n-1)·var = sum(x^2) - n·mean^2, and nearest rank on 1..100.
TEST(StatsTest, MatchesClosedForms) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::vector<double> shuffled = v;
  std::reverse(shuffled.begin(), shuffled.end());
  LatencyStats s = ComputeStats(shuffled, 0, 0);
  double sq = 0;
  for (double x : v) sq += x * x;
  EXPECT_DOUBLE_EQ(s.avg_ms, 50.5);
  EXPECT_NEAR(s.dev_ms, std::sqrt((sq - 100 * 50.5 * 50.5) / 99), 1e-9);
  EXPECT_EQ(s.p95_ms, 95);
  EXPECT_GE(s.dev_ms, 0);
}

TEST(BenchLatencyTest, StatsMatchRun) {
  auto run = paths::RunPath(paths::ProtocolPath::kRtpUdp, netem::Profile("wifi"), {}, 5, 7);
  LatencyStats s = BenchLatency(paths::ProtocolPath::kRtpUdp, netem::Profile("wifi"), 5, 7);
  EXPECT_EQ(s, StatsFromRun(run));
  EXPECT_EQ(s.n + s.skipped + s.lost, run.sent);
  EXPECT_EQ(s, BenchLatency(paths::ProtocolPath::kRtpUdp, netem::Profile("wifi"), 5, 7));
}

TEST(ResolutionTest, Parse) {
  EXPECT_EQ(ParseResolution("3840x2160"), (Resolution{3840, 2160}));
  EXPECT_EQ(FormatResolution({1920, 1080}), "1920x1080");
  for (const char* bad : {"1920", "1920x", "x1080", "1920x1080p", "0x0", "1921x1080"}) {
    EXPECT_THROW(ParseResolution(bad), Error) << bad;
  }
}

TEST(BenchFpsTest, TooFewFramesIsPrecondition) {
  try {
    BenchFps(media::IngestMode::kInproc, {}, 10, TempPath("rrsb_fps"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(BenchFpsTest, UnwritableSinkIsIo) {
  try {
    BenchFps(media::IngestMode::kInproc, {}, 300, "/nonexistent/dir/out.au");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

// Every AU lands in the file: 300 frames at 10 Mbps, 60 fps, GOP 5 is 60
// GOPs of one 44642-byte I and four 14880-byte P payloads, each behind the
// 33-byte record prefix.
TEST(BenchFpsTest, WritesEveryFrame) {
  const std::string path = TempPath("rrsb_fps");
  for (auto mode : {media::IngestMode::kInproc, media::IngestMode::kPipe}) {
    double fps = BenchFps(mode, {640, 360}, 300, path);
    EXPECT_GT(fps, 0);
    EXPECT_EQ(std::filesystem::file_size(path),
              60u * (44642 + 4 * 14880) + 300u * 33) << media::IngestModeName(mode);
  }
  std::filesystem::remove(path);
}

TEST(BenchFpsTest, PipeSlowsWithResolution) {
  const std::string path = TempPath("rrsb_fps");
  double small = BenchFps(media::IngestMode::kPipe, {640, 360}, 300, path);
  double hd = BenchFps(media::IngestMode::kPipe, {1920, 1080}, 300, path);
  EXPECT_GE(small, hd);
  std::filesystem::remove(path);
}

BenchReport SampleReport() {
  BenchReport r;
  r.seed = 3;
  r.config = {{"duration_s", 30}};
  for (const char* path : {"rtp-udp", "dash"}) {
    for (const char* profile : {"wifi", "fiveg"}) {
      r.Add(LatencyEntry{path, profile, 3, 30, ComputeStats({55.25, 57.5, 61.125}, 1, 0)});
    }
  }
  r.Add(FpsEntry{"inproc", {1920, 1080}, 1200, 812.3456});
  return r;
}

TEST(ReportTest, MarkdownRows) {
  const std::string md = ReportMarkdown(SampleReport());
  EXPECT_EQ(md.rfind("| Protocol | Latency_avg (ms) | Latency_dev (ms) | Profile |\n", 0), 0u);
  EXPECT_NE(md.find("| rtp-udp | 58 | 3 | wifi |\n"), std::string::npos);
  EXPECT_NE(md.find("| dash | 58 | 3 | fiveg |\n"), std::string::npos);
  EXPECT_NE(md.find("| inproc | 1920x1080 | 1200 | 812 |\n"), std::string::npos);
  int rows = 0;
  for (std::size_t p = md.find("| rtp-udp"); p != std::string::npos; p = md.find("\n|", p + 1)) {
    ++rows;
  }
  EXPECT_GE(rows, 4);
}

TEST(ReportTest, AddReplacesSameKey) {
  BenchReport r = SampleReport();
  r.Add(LatencyEntry{"dash", "wifi", 4, 30, ComputeStats({1}, 0, 0)});
  ASSERT_EQ(r.latency.size(), 4u);
  EXPECT_EQ(r.latency[2].seed, 4u);
}

TEST(ReportTest, CsvIsUnrounded) {
  const std::string csv = ReportCsv(SampleReport());
  EXPECT_EQ(csv.rfind("path,profile,seed,duration_s,n,skipped,lost,avg_ms,dev_ms,p95_ms\n", 0),
            0u);
  const std::string prefix = "rtp-udp,wifi,3,30,3,1,0,";
  const std::size_t at = csv.find(prefix);
  ASSERT_NE(at, std::string::npos);
  EXPECT_EQ(std::strtod(csv.c_str() + at + prefix.size(), nullptr), 173.875 / 3);
  EXPECT_NE(csv.find("inproc,1920,1080,1200,812.3456\n"), std::string::npos);
}

TEST(ReportTest, JsonRoundTrip) {
  const BenchReport r = SampleReport();
  EXPECT_EQ(ReportFromJson(nlohmann::json::parse(ReportJson(r).dump())), r);
  EXPECT_THROW(ReportFromJson(nlohmann::json::parse(R"({"latency":[{"path":"x"}]})")), Error);
}

}  // namespace
}  // namespace rrsb::bench
