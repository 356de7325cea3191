#ifndef RRSB_BENCH_BENCH_H_
#define RRSB_BENCH_BENCH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rrsb/media/ingest.h"
#include "rrsb/netem/profile.h"
#include "rrsb/paths/run_path.h"

namespace rrsb::bench {

struct LatencyStats {
  double avg_ms = 0;
  double dev_ms = 0;  // sample standard deviation (n - 1)
  double p95_ms = 0;  // nearest rank
  int64_t n = 0;
  int64_t skipped = 0;
  int64_t lost = 0;

  bool operator==(const LatencyStats&) const = default;
};

// Throws kInvalidRun when `latencies_ms` is empty.
LatencyStats ComputeStats(std::vector<double> latencies_ms, int64_t skipped, int64_t lost);
LatencyStats StatsFromRun(const paths::RunResult& run);

LatencyStats BenchLatency(paths::ProtocolPath path, const netem::NetProfile& profile,
                          double duration_s, uint64_t seed,
                          const paths::PathConfig& cfg = {});

struct Resolution {
  int width = 1920;
  int height = 1080;

  bool operator==(const Resolution&) const = default;
};

// "1920x1080"; anything else is kPrecondition.
Resolution ParseResolution(const std::string& text);
std::string FormatResolution(const Resolution& res);

// Sustained post-encode rate of the ingest pipeline into a FileSink at
// `sink_path`. n_frames < 300 is kPrecondition; sink failures are kIo.
double BenchFps(media::IngestMode mode, const Resolution& res, int64_t n_frames,
                const std::string& sink_path);

struct LatencyEntry {
  std::string path;
  std::string profile;
  uint64_t seed = 0;
  double duration_s = 0;
  LatencyStats stats;

  bool operator==(const LatencyEntry&) const = default;
};

struct FpsEntry {
  std::string ingest;
  Resolution res;
  int64_t frames = 0;
  double fps = 0;

  bool operator==(const FpsEntry&) const = default;
};

struct BenchReport {
  uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<LatencyEntry> latency;
  std::vector<FpsEntry> fps;

  // Replaces an entry with the same (path, profile) or (ingest, res).
  void Add(LatencyEntry entry);
  void Add(FpsEntry entry);

  bool operator==(const BenchReport&) const = default;
};

// Markdown tables with integer latencies; rows in report order.
std::string ReportMarkdown(const BenchReport& report);
// Latency table, blank line, fps table. Numbers unrounded.
std::string ReportCsv(const BenchReport& report);
nlohmann::json ReportJson(const BenchReport& report);
BenchReport ReportFromJson(const nlohmann::json& j);

}  // namespace rrsb::bench

#endif  // RRSB_BENCH_BENCH_H_
