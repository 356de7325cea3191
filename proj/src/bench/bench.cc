#include "rrsb/bench/bench.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rrsb/common/error.h"

namespace rrsb::bench {

LatencyStats ComputeStats(std::vector<double> latencies_ms, int64_t skipped, int64_t lost) {
  if (latencies_ms.empty()) throw Error(ErrorCode::kInvalidRun, "no delivered frames");
  LatencyStats s;
  s.n = static_cast<int64_t>(latencies_ms.size());
  s.skipped = skipped;
  s.lost = lost;
  double sum = 0;
  for (double v : latencies_ms) sum += v;
  s.avg_ms = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0;
    for (double v : latencies_ms) sq += (v - s.avg_ms) * (v - s.avg_ms);
    s.dev_ms = std::sqrt(sq / static_cast<double>(s.n - 1));
  }
  std::sort(latencies_ms.begin(), latencies_ms.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(s.n)));
  s.p95_ms = latencies_ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

LatencyStats StatsFromRun(const paths::RunResult& run) {
  std::vector<double> ms;
  ms.reserve(run.samples.size());
  for (const auto& s : run.samples) ms.push_back(static_cast<double>(s.latency_us) / 1000.0);
  return ComputeStats(std::move(ms), run.skipped, run.lost);
}

LatencyStats BenchLatency(paths::ProtocolPath path, const netem::NetProfile& profile,
                          double duration_s, uint64_t seed, const paths::PathConfig& cfg) {
  return StatsFromRun(paths::RunPath(path, profile, cfg, duration_s, seed));
}

Resolution ParseResolution(const std::string& text) {
  Resolution r;
  char x = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d%c%d%c", &r.width, &x, &r.height, &extra) != 3 || x != 'x' ||
      r.width <= 0 || r.height <= 0 || r.width % 2 || r.height % 2) {
    throw Error(ErrorCode::kPrecondition, "bad resolution '" + text + "'");
  }
  return r;
}

std::string FormatResolution(const Resolution& res) {
  return std::to_string(res.width) + "x" + std::to_string(res.height);
}

double BenchFps(media::IngestMode mode, const Resolution& res, int64_t n_frames,
                const std::string& sink_path) {
  if (n_frames < 300) throw Error(ErrorCode::kPrecondition, "n_frames must be >= 300");
  media::IngestOptions opts;
  opts.video.width = res.width;
  opts.video.height = res.height;
  opts.n_frames = n_frames;
  media::FileSink sink(sink_path);
  const media::IngestResult r = media::Ingest(mode, opts, sink);
  sink.Flush();
  return r.fps;
}

void BenchReport::Add(LatencyEntry entry) {
  for (auto& e : latency) {
    if (e.path == entry.path && e.profile == entry.profile) {
      e = std::move(entry);
      return;
    }
  }
  latency.push_back(std::move(entry));
}

void BenchReport::Add(FpsEntry entry) {
  for (auto& e : fps) {
    if (e.ingest == entry.ingest && e.res == entry.res) {
      e = std::move(entry);
      return;
    }
  }
  fps.push_back(std::move(entry));
}

namespace {

std::string Rounded(double v) { return std::to_string(std::llround(v)); }

// Shortest text that parses back to the same double.
std::string Exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

std::string ReportMarkdown(const BenchReport& report) {
  std::ostringstream out;
  out << "| Protocol | Latency_avg (ms) | Latency_dev (ms) | Profile |\n";
  out << "|---|---|---|---|\n";
  for (const auto& e : report.latency) {
    out << "| " << e.path << " | " << Rounded(e.stats.avg_ms) << " | " << Rounded(e.stats.dev_ms)
        << " | " << e.profile << " |\n";
  }
  if (!report.fps.empty()) {
    out << "\n| Ingest | Resolution | Frames | FPS |\n";
    out << "|---|---|---|---|\n";
    for (const auto& e : report.fps) {
      out << "| " << e.ingest << " | " << FormatResolution(e.res) << " | " << e.frames << " | "
          << Rounded(e.fps) << " |\n";
    }
  }
  return out.str();
}

std::string ReportCsv(const BenchReport& report) {
  std::ostringstream out;
  out << "path,profile,seed,duration_s,n,skipped,lost,avg_ms,dev_ms,p95_ms\n";
  for (const auto& e : report.latency) {
    out << e.path << ',' << e.profile << ',' << e.seed << ',' << Exact(e.duration_s) << ','
        << e.stats.n << ',' << e.stats.skipped << ',' << e.stats.lost << ','
        << Exact(e.stats.avg_ms) << ',' << Exact(e.stats.dev_ms) << ',' << Exact(e.stats.p95_ms)
        << '\n';
  }
  out << "\ningest,width,height,frames,fps\n";
  for (const auto& e : report.fps) {
    out << e.ingest << ',' << e.res.width << ',' << e.res.height << ',' << e.frames << ','
        << Exact(e.fps) << '\n';
  }
  return out.str();
}

nlohmann::json ReportJson(const BenchReport& report) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["config"] = report.config;
  j["latency"] = nlohmann::json::array();
  for (const auto& e : report.latency) {
    j["latency"].push_back({{"path", e.path},
                            {"profile", e.profile},
                            {"seed", e.seed},
                            {"duration_s", e.duration_s},
                            {"avg_ms", e.stats.avg_ms},
                            {"dev_ms", e.stats.dev_ms},
                            {"p95_ms", e.stats.p95_ms},
                            {"n", e.stats.n},
                            {"skipped", e.stats.skipped},
                            {"lost", e.stats.lost}});
  }
  j["fps"] = nlohmann::json::array();
  for (const auto& e : report.fps) {
    j["fps"].push_back({{"ingest", e.ingest},
                        {"width", e.res.width},
                        {"height", e.res.height},
                        {"frames", e.frames},
                        {"fps", e.fps}});
  }
  return j;
}

BenchReport ReportFromJson(const nlohmann::json& j) {
  BenchReport r;
  try {
    r.seed = j.value("seed", uint64_t{0});
    r.config = j.value("config", nlohmann::json::object());
    for (const auto& e : j.value("latency", nlohmann::json::array())) {
      LatencyEntry le;
      le.path = e.at("path").get<std::string>();
      le.profile = e.at("profile").get<std::string>();
      le.seed = e.at("seed").get<uint64_t>();
      le.duration_s = e.at("duration_s").get<double>();
      le.stats.avg_ms = e.at("avg_ms").get<double>();
      le.stats.dev_ms = e.at("dev_ms").get<double>();
      le.stats.p95_ms = e.at("p95_ms").get<double>();
      le.stats.n = e.at("n").get<int64_t>();
      le.stats.skipped = e.at("skipped").get<int64_t>();
      le.stats.lost = e.at("lost").get<int64_t>();
      r.latency.push_back(std::move(le));
    }
    for (const auto& e : j.value("fps", nlohmann::json::array())) {
      FpsEntry fe;
      fe.ingest = e.at("ingest").get<std::string>();
      fe.res.width = e.at("width").get<int>();
      fe.res.height = e.at("height").get<int>();
      fe.frames = e.at("frames").get<int64_t>();
      fe.fps = e.at("fps").get<double>();
      r.fps.push_back(std::move(fe));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("bench report: ") + e.what());
  }
  return r;
}

}  // namespace rrsb::bench
