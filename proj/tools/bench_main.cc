// Benchmark front end: latency runs, ingest throughput and report rendering.
//
//   bench latency --path rtp-udp --profile wifi --duration 30 --seed 1
//   bench fps --ingest inproc --res 1920x1080 --frames 1200
//   bench report --format md
//
// Values are taken from flags, then the --config JSON file, then (seed only)
// RRSB_SEED, then the built-in defaults. Results accumulate in --report.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rrsb/bench/bench.h"
#include "rrsb/common/error.h"
#include "rrsb/netem/profile.h"
#include "rrsb/paths/run_path.h"

namespace {

using nlohmann::json;
using rrsb::bench::BenchReport;

json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rrsb::Error(rrsb::ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw rrsb::Error(rrsb::ErrorCode::kMalformed, path + ": " + e.what());
  }
}

BenchReport LoadReport(const std::string& path) {
  if (!std::filesystem::exists(path)) return {};
  return rrsb::bench::ReportFromJson(LoadJsonFile(path));
}

void SaveReport(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw rrsb::Error(rrsb::ErrorCode::kIo, "cannot write " + path);
  out << rrsb::bench::ReportJson(report).dump(2) << "\n";
}

// Fills `value` from config[key] unless the flag was given.
template <typename T>
void FromConfig(const CLI::Option* opt, const json& config, const char* key, T& value) {
  if (opt->count() > 0 || !config.contains(key)) return;
  try {
    value = config.at(key).get<T>();
  } catch (const json::exception& e) {
    throw rrsb::Error(rrsb::ErrorCode::kMalformed, std::string("config '") + key + "': " +
                                                       e.what());
  }
}

// Accepts "a" or ["a", "b"] for list options.
void ListFromConfig(const CLI::Option* opt, const json& config, const char* key,
                    std::vector<std::string>& value) {
  if (opt->count() > 0 || !config.contains(key)) return;
  const json& v = config.at(key);
  if (v.is_string()) {
    value = {v.get<std::string>()};
  } else {
    FromConfig(opt, config, key, value);
  }
}

uint64_t ResolveSeed(const CLI::Option* opt, const json& config, uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  if (config.contains("seed")) return config.at("seed").get<uint64_t>();
  if (const char* env = std::getenv("RRSB_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw rrsb::Error(rrsb::ErrorCode::kPrecondition,
                        std::string("RRSB_SEED is not a number: ") + env);
    }
    return v;
  }
  return 1;
}

struct LatencyArgs {
  std::vector<std::string> paths = {"rtp-udp"};
  std::vector<std::string> profiles = {"wifi"};
  double duration_s = 30;
  uint64_t seed = 1;
  bool realtime = false;
  bool parallel = false;
  std::string ingest = "inproc";
  std::optional<double> loss;
  std::string out_dir;
};

struct FpsArgs {
  std::vector<std::string> ingest = {"inproc"};
  std::vector<std::string> res = {"1920x1080"};
  int64_t frames = 1200;
  std::string sink;
};

std::vector<std::string> ExpandPaths(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (auto p : rrsb::paths::kAllPaths) out.push_back(rrsb::paths::PathName(p));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

rrsb::netem::NetProfile MakeProfile(const std::string& name, const json& config,
                                    const std::optional<double>& loss) {
  rrsb::netem::NetProfile p = rrsb::netem::Profile(name);
  if (config.contains("profile_overrides") && config["profile_overrides"].contains(name)) {
    json o = config["profile_overrides"][name];
    o["base"] = name;
    o["name"] = name;
    p = rrsb::netem::ProfileFromJson(o);
  }
  if (loss) p.loss_rate = *loss;
  p.Validate();
  return p;
}

int RunLatency(const LatencyArgs& args, const json& config, const std::string& report_path) {
  rrsb::paths::PathConfig cfg;
  cfg.realtime = args.realtime;
  cfg.ingest = rrsb::media::ParseIngestMode(args.ingest);

  struct Job {
    std::string path;
    std::string profile;
    std::future<rrsb::paths::RunResult> result;
  };
  std::vector<Job> jobs;
  int failures = 0;
  for (const auto& profile_name : args.profiles) {
    for (const auto& path_name : ExpandPaths(args.paths)) {
      Job job{path_name, profile_name, {}};
      auto launch = args.parallel && !args.realtime ? std::launch::async : std::launch::deferred;
      job.result = std::async(launch, [&, path_name, profile_name] {
        return rrsb::paths::RunPath(rrsb::paths::ParsePath(path_name),
                                    MakeProfile(profile_name, config, args.loss), cfg,
                                    args.duration_s, args.seed);
      });
      jobs.push_back(std::move(job));
    }
  }

  BenchReport report = LoadReport(report_path);
  report.seed = args.seed;
  report.config["duration_s"] = args.duration_s;
  report.config["realtime"] = args.realtime;
  report.config["ingest"] = args.ingest;
  for (auto& job : jobs) {
    try {
      rrsb::paths::RunResult run = job.result.get();
      rrsb::bench::LatencyStats stats = rrsb::bench::StatsFromRun(run);
      std::printf("%-8s %-6s avg_ms=%.3f dev_ms=%.3f p95_ms=%.3f n=%lld skipped=%lld lost=%lld\n",
                  job.path.c_str(), job.profile.c_str(), stats.avg_ms, stats.dev_ms, stats.p95_ms,
                  static_cast<long long>(stats.n), static_cast<long long>(stats.skipped),
                  static_cast<long long>(stats.lost));
      report.Add(rrsb::bench::LatencyEntry{job.path, job.profile, args.seed, args.duration_s,
                                           stats});
      if (!args.out_dir.empty()) {
        rrsb::paths::WriteRunOutputs(
            run, cfg, (std::filesystem::path(args.out_dir) / (job.path + "-" + job.profile))
                          .string());
      }
    } catch (const std::exception& e) {
      ++failures;
      std::fprintf(stderr, "error: %s/%s: %s\n", job.path.c_str(), job.profile.c_str(), e.what());
    }
  }
  SaveReport(report, report_path);
  return failures == 0 ? 0 : 1;
}

int RunFps(const FpsArgs& args, const std::string& report_path) {
  const std::string sink =
      args.sink.empty()
          ? (std::filesystem::temp_directory_path() / ("rrsb_fps_" + std::to_string(::getpid())))
                .string()
          : args.sink;
  BenchReport report = LoadReport(report_path);
  int failures = 0;
  for (const auto& res_text : args.res) {
    for (const auto& mode_name : args.ingest) {
      try {
        const auto res = rrsb::bench::ParseResolution(res_text);
        const auto mode = rrsb::media::ParseIngestMode(mode_name);
        const double fps = rrsb::bench::BenchFps(mode, res, args.frames, sink);
        std::printf("%-6s %-9s frames=%lld fps=%.1f\n", mode_name.c_str(), res_text.c_str(),
                    static_cast<long long>(args.frames), fps);
        report.Add(rrsb::bench::FpsEntry{mode_name, res, args.frames, fps});
      } catch (const std::exception& e) {
        ++failures;
        std::fprintf(stderr, "error: %s/%s: %s\n", mode_name.c_str(), res_text.c_str(), e.what());
      }
    }
  }
  if (args.sink.empty()) std::filesystem::remove(sink);
  SaveReport(report, report_path);
  return failures == 0 ? 0 : 1;
}

int RunReport(const std::string& format, const std::string& report_path) {
  if (!std::filesystem::exists(report_path)) {
    throw rrsb::Error(rrsb::ErrorCode::kIo, "no report at " + report_path);
  }
  const BenchReport report = LoadReport(report_path);
  if (format == "md") {
    std::cout << rrsb::bench::ReportMarkdown(report);
  } else if (format == "csv") {
    std::cout << rrsb::bench::ReportCsv(report);
  } else {
    std::cout << rrsb::bench::ReportJson(report).dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote renderer streaming benchmarks"};
  app.require_subcommand(1);
  std::string config_path;
  std::string report_path = "bench_report.json";
  app.add_option("--config", config_path, "JSON file with default option values");
  auto* report_opt = app.add_option("--report", report_path, "Accumulated results file");

  LatencyArgs lat;
  auto* latency = app.add_subcommand("latency", "Glass-to-glass latency of delivery paths");
  auto* path_opt = latency->add_option("--path", lat.paths,
                                       "rtp-udp, rtp-smt, moq, dash, lldash or all");
  auto* profile_opt = latency->add_option("--profile", lat.profiles, "wifi or fiveg");
  auto* duration_opt = latency->add_option("--duration", lat.duration_s, "Seconds of media");
  auto* seed_opt = latency->add_option("--seed", lat.seed, "Run seed");
  auto* realtime_opt = latency->add_flag("--realtime", lat.realtime, "Wall clock and sockets");
  auto* parallel_opt = latency->add_flag("--parallel", lat.parallel, "Run paths concurrently");
  auto* ingest_opt = latency->add_option("--ingest", lat.ingest, "inproc or pipe");
  double loss = 0;
  auto* loss_opt = latency->add_option("--loss", loss, "Override the profile loss rate");
  auto* out_opt = latency->add_option("--out", lat.out_dir, "Directory for samples.csv/run.json");

  FpsArgs fps;
  auto* fps_cmd = app.add_subcommand("fps", "Ingest throughput into a file sink");
  auto* fps_ingest_opt = fps_cmd->add_option("--ingest", fps.ingest, "inproc or pipe");
  auto* res_opt = fps_cmd->add_option("--res", fps.res, "WIDTHxHEIGHT");
  auto* frames_opt = fps_cmd->add_option("--frames", fps.frames, "Frames to encode (>= 300)");
  auto* sink_opt = fps_cmd->add_option("--sink", fps.sink, "Output file");

  std::string format = "md";
  auto* report_cmd = app.add_subcommand("report", "Print accumulated results");
  auto* format_opt = report_cmd->add_option("--format", format, "md, csv or json")
                         ->check(CLI::IsMember({"md", "csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    json config = json::object();
    if (!config_path.empty()) config = LoadJsonFile(config_path);
    if (!config.is_object()) {
      throw rrsb::Error(rrsb::ErrorCode::kMalformed, "config must be a JSON object");
    }
    FromConfig(report_opt, config, "report", report_path);

    if (latency->parsed()) {
      ListFromConfig(path_opt, config, "path", lat.paths);
      ListFromConfig(profile_opt, config, "profile", lat.profiles);
      FromConfig(duration_opt, config, "duration", lat.duration_s);
      FromConfig(realtime_opt, config, "realtime", lat.realtime);
      FromConfig(parallel_opt, config, "parallel", lat.parallel);
      FromConfig(ingest_opt, config, "ingest", lat.ingest);
      FromConfig(out_opt, config, "out", lat.out_dir);
      if (loss_opt->count() > 0) {
        lat.loss = loss;
      } else if (config.contains("loss")) {
        lat.loss = config.at("loss").get<double>();
      }
      lat.seed = ResolveSeed(seed_opt, config, lat.seed);
      return RunLatency(lat, config, report_path);
    }
    if (fps_cmd->parsed()) {
      ListFromConfig(fps_ingest_opt, config, "ingest", fps.ingest);
      ListFromConfig(res_opt, config, "res", fps.res);
      FromConfig(frames_opt, config, "frames", fps.frames);
      FromConfig(sink_opt, config, "sink", fps.sink);
      return RunFps(fps, report_path);
    }
    FromConfig(format_opt, config, "format", format);
    return RunReport(format, report_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
