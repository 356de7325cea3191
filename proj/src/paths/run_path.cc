#include "rrsb/paths/run_path.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "rrsb/dash/mpd.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/media/au_header.h"
#include "rrsb/media/encoder.h"
#include "rrsb/moq/moq.h"
#include "rrsb/netem/channel.h"
#include "rrsb/paths/origin.h"
#include "rrsb/paths/packager.h"
#include "rrsb/rtp/depacketizer.h"
#include "rrsb/rtp/jitter_buffer.h"
#include "rrsb/rtp/rtp_packet.h"
#include "rrsb/sim/event_loop.h"
#include "rrsb/sim/realtime_loop.h"

namespace rrsb::paths {
namespace {

// Virtual-time sender clock reading at simulation time zero.
constexpr int64_t kSenderEpochUs = 1'700'000'000'000'000;
constexpr uint32_t kMoqTrack = 1;
constexpr int64_t kSetupBudgetUs = 1'000'000;

// Jitter buffer driven by a timer at its next ready time.
class JitterStage {
 public:
  using PopFn = std::function<void(media::AccessUnit&&, int64_t now_us)>;

  JitterStage(sim::EventLoop* loop, const rtp::JitterBufferConfig& cfg, PopFn pop)
      : loop_(loop), buffer_(cfg), pop_(std::move(pop)) {}
  ~JitterStage() { loop_->Cancel(timer_); }

  void Insert(media::AccessUnit au, int64_t first_arrival_us) {
    buffer_.Insert(std::move(au), first_arrival_us);
    Arm();
  }

 private:
  void Arm() {
    auto next = buffer_.NextReadyTime();
    if (!next || (timer_ != sim::kNoTimer && armed_at_ <= *next)) return;
    loop_->Cancel(timer_);
    armed_at_ = *next;
    timer_ = loop_->PostAt(*next, [this] {
      timer_ = sim::kNoTimer;
      const int64_t now = loop_->Now();
      for (auto& au : buffer_.PopReady(now)) pop_(std::move(au), now);
      Arm();
    });
  }

  sim::EventLoop* loop_;
  rtp::JitterBuffer buffer_;
  PopFn pop_;
  sim::TimerId timer_ = sim::kNoTimer;
  int64_t armed_at_ = 0;
};

// Depacketizer driven by a timer at its next expiry.
class RtpReceiver {
 public:
  using AuFn = std::function<void(rtp::ReassembledAu&&)>;

  RtpReceiver(sim::EventLoop* loop, AuFn on_au) : loop_(loop), on_au_(std::move(on_au)) {}
  ~RtpReceiver() { loop_->Cancel(timer_); }

  void OnPacket(ByteView bytes, int64_t arrival_us) {
    rtp::RtpPacket packet;
    try {
      packet = rtp::RtpPacket::Parse(bytes);
    } catch (const MalformedError&) {
      ++malformed_;
      return;
    }
    Handle(depacketizer_.Insert(packet, arrival_us));
  }
  int64_t malformed() const { return malformed_; }

 private:
  void Handle(rtp::DepacketizerOutput&& out) {
    for (auto& au : out.aus) on_au_(std::move(au));
    auto next = depacketizer_.NextExpiry();
    if (!next || (timer_ != sim::kNoTimer && armed_at_ <= *next)) return;
    loop_->Cancel(timer_);
    armed_at_ = *next;
    timer_ = loop_->PostAt(*next, [this] {
      timer_ = sim::kNoTimer;
      Handle(depacketizer_.Expire(loop_->Now()));
    });
  }

  sim::EventLoop* loop_;
  AuFn on_au_;
  rtp::Depacketizer depacketizer_;
  sim::TimerId timer_ = sim::kNoTimer;
  int64_t armed_at_ = 0;
  int64_t malformed_ = 0;
};

class PathRun {
 public:
  PathRun(ProtocolPath path, const netem::NetProfile& profile, const PathConfig& cfg,
          double duration_s, uint64_t seed)
      : path_(path), profile_(profile), cfg_(cfg), duration_s_(duration_s), seed_(seed) {
    profile_.seed = seed;
    if (cfg_.realtime) {
      rloop_ = std::make_unique<sim::RealtimeLoop>();
      loop_ = rloop_.get();
      sender_base_ = 0;
    } else {
      vloop_ = std::make_unique<sim::VirtualScheduler>();
      loop_ = vloop_.get();
      sender_base_ = kSenderEpochUs;
    }
    rx_base_ = sender_base_ + cfg_.receiver_clock_offset_us;
    fwd_ = MakeChannel(0);
    rev_ = MakeChannel(1);
    sync_fwd_ = MakeChannel(2);
    sync_rev_ = MakeChannel(3);
    if (cfg_.forward_drop_filter) fwd_->link().SetDropFilter(cfg_.forward_drop_filter);
    frames_ = static_cast<int64_t>(std::llround(duration_s_ * cfg_.encoder.fps));
  }

  RunResult Run() {
    result_.path = path_;
    result_.profile = profile_.name;
    result_.seed = seed_;
    result_.duration_s = duration_s_;
    result_.sent = frames_;

    RunClockSync();
    RunSetup();
    RunStream();
    Collect();
    return std::move(result_);
  }

 private:
  std::unique_ptr<netem::DatagramChannel> MakeChannel(uint64_t index) {
    netem::NetProfile p = profile_;
    p.seed = seed_ * 4 + index;
    if (rloop_) return std::make_unique<netem::UdpChannel>(rloop_.get(), p);
    return std::make_unique<netem::SimChannel>(loop_, p);
  }

  int64_t SenderNow() const { return loop_->Now() + sender_base_; }
  int64_t OriginEstimate() const { return loop_->Now() + rx_base_ + est_offset_; }

  bool RunUntil(const std::function<bool()>& done, int64_t deadline) {
    if (vloop_) return vloop_->RunUntil(done, deadline);
    return rloop_->RunUntil(done, deadline);
  }
  void RunTo(int64_t deadline) {
    if (vloop_) {
      vloop_->RunUntil(deadline);
    } else {
      rloop_->RunUntil([] { return false; }, deadline);
    }
  }

  void RunPhase(const std::string& phase, const std::function<void()>& body) {
    try {
      body();
    } catch (const RunError&) {
      throw;
    } catch (const std::exception& e) {
      throw RunError(phase, e.what());
    }
  }

  void RunClockSync() {
    RunPhase("clocksync", [&] {
      sim::LocalClock sender_clock(loop_, sender_base_);
      sim::LocalClock receiver_clock(loop_, rx_base_);
      clocksync::SyncServer server(sender_clock, [this](Bytes b) { sync_fwd_->Send(std::move(b)); });
      clocksync::SyncClient client(loop_, receiver_clock,
                                   [this](Bytes b) { sync_rev_->Send(std::move(b)); }, cfg_.sync);
      sync_rev_->SetReceiver([&](Bytes d, int64_t) { server.OnDatagram(d); });
      sync_fwd_->SetReceiver([&](Bytes d, int64_t) { client.OnDatagram(d); });
      std::optional<clocksync::ClockEstimate> estimate;
      std::exception_ptr error;
      client.Start([&](const clocksync::ClockEstimate* e, const std::exception_ptr& err) {
        if (e) estimate = *e;
        error = err;
      });
      const int64_t deadline =
          loop_->Now() + (cfg_.sync.rounds + 1) * cfg_.sync.round_timeout_us + 1'000'000;
      RunUntil([&] { return client.finished(); }, deadline);
      sync_rev_->SetReceiver(nullptr);
      sync_fwd_->SetReceiver(nullptr);
      if (error) std::rethrow_exception(error);
      if (!estimate) throw Error(ErrorCode::kTimeout, "handshake did not finish");
      est_offset_ = estimate->offset_us;
      result_.clock = *estimate;
    });
  }

  void RunSetup() {
    RunPhase("setup", [&] {
      stream_start_ = loop_->Now() + kSetupBudgetUs;
      result_.stream_start_us = stream_start_ + sender_base_;
      switch (path_) {
        case ProtocolPath::kRtpUdp:
          SetupRtpUdp();
          break;
        case ProtocolPath::kRtpSmt:
          SetupRtpSmt();
          break;
        case ProtocolPath::kMoqLite:
          SetupMoq();
          break;
        case ProtocolPath::kDash:
        case ProtocolPath::kLlDash:
          SetupDash();
          break;
      }
      RunUntil([&] { return setup_done_ || !setup_error_.empty(); }, stream_start_);
      if (!setup_error_.empty()) throw Error(ErrorCode::kProtocol, setup_error_);
      if (!setup_done_) throw Error(ErrorCode::kTimeout, "path not ready before stream start");
    });
  }

  void SetupRtpUdp() {
    rtp_packager_.emplace(cfg_.rtp_mtu_payload);
    MakeRtpReceiver();
    fwd_->SetReceiver([this](Bytes d, int64_t at) { rtp_rx_->OnPacket(d, at); });
    setup_done_ = true;
  }

  void SetupRtpSmt() {
    rtp_packager_.emplace(cfg_.rtp_mtu_payload);
    MakeRtpReceiver();
    MakeConnections(/*sender_is_client=*/true);
    sender_conn_->Attach(rev_.get(), [](smt::SmtEvent&&) {});
    receiver_conn_->Attach(fwd_.get(), [this](smt::SmtEvent&& e) {
      if (e.kind == smt::SmtEvent::Kind::kConnectionError) throw Error(ErrorCode::kProtocol, e.error);
      if (e.kind != smt::SmtEvent::Kind::kStreamData) return;
      framed_.insert(framed_.end(), e.data.begin(), e.data.end());
      std::size_t pos = 0;
      while (framed_.size() - pos >= 2) {
        const std::size_t len = (std::size_t{framed_[pos]} << 8) | framed_[pos + 1];
        if (framed_.size() - pos - 2 < len) break;
        rtp_rx_->OnPacket(ByteView(framed_).subspan(pos + 2, len), loop_->Now());
        pos += 2 + len;
      }
      framed_.erase(framed_.begin(), framed_.begin() + static_cast<std::ptrdiff_t>(pos));
    });
    rtp_stream_ = sender_conn_->OpenStream();
    setup_done_ = true;
  }

  void SetupMoq() {
    MakeJitter();
    MakeConnections(/*sender_is_client=*/true);
    publisher_ = std::make_unique<moq::Publisher>(sender_conn_.get(), kMoqTrack, "video",
                                                  cfg_.encoder.gop_length, cfg_.encoder.fps);
    subscriber_ =
        std::make_unique<moq::Subscriber>(receiver_conn_.get(), kMoqTrack, cfg_.encoder.gop_length);
    sender_conn_->Attach(rev_.get(), [this](smt::SmtEvent&& e) {
      if (e.kind == smt::SmtEvent::Kind::kStreamData && e.stream_id == moq::kControlStreamId) {
        publisher_->OnControlData(e.data);
        setup_done_ = publisher_->subscribed();
      }
    });
    receiver_conn_->Attach(fwd_.get(), [this](smt::SmtEvent&& e) {
      using Kind = smt::SmtEvent::Kind;
      if (e.kind == Kind::kConnectionError) throw Error(ErrorCode::kProtocol, e.error);
      std::vector<moq::DeliveredObject> objects;
      if (e.kind == Kind::kStreamData) {
        if (e.stream_id == moq::kControlStreamId) {
          subscriber_->OnControlData(e.data);
          return;
        }
        objects = subscriber_->OnStreamData(e.stream_id, e.data, loop_->Now());
      } else if (e.kind == Kind::kStreamFin) {
        objects = subscriber_->OnStreamFin(e.stream_id);
      }
      for (auto& o : objects) {
        auto decoded = Verify(o.payload);
        if (!decoded) continue;
        media::AccessUnit au;
        au.seq = decoded->seq;
        au.pts_90k = o.pts_90k;
        au.dts_90k = o.pts_90k;
        au.keyframe = o.keyframe;
        au.capture_ts_us = decoded->capture_ts_us;
        jitter_->Insert(std::move(au), o.first_arrival_us);
      }
    });
    publisher_->Announce();
  }

  void SetupDash() {
    const bool ll = path_ == ProtocolPath::kLlDash;
    dash::MpdConfig mpd;
    mpd.segment_duration_s = cfg_.segment_duration_s;
    mpd.fragment_duration_s = cfg_.fragment_duration_s;
    mpd.low_latency = ll;
    mpd.availability_start_time_us = stream_start_ + sender_base_;
    mpd.fps = cfg_.encoder.fps;
    mpd.width = cfg_.width;
    mpd.height = cfg_.height;
    mpd.bandwidth_bps = cfg_.encoder.bitrate_bps;
    mpd.Validate();
    segment_packager_.emplace(mpd);
    // The player fetches over streams it opens, so it is the client here.
    MakeConnections(/*sender_is_client=*/false);
    isobmff::TrackConfig track;
    track.width = cfg_.width;
    track.height = cfg_.height;
    origin_ = std::make_unique<LiveOrigin>(sender_conn_.get(), mpd, isobmff::BuildInitSegment(track),
                                           [this] { return SenderNow(); });
    player_ = std::make_unique<DashPlayer>(
        loop_, receiver_conn_.get(), cfg_.player, [this] { return OriginEstimate(); },
        [this](PlayedFrame&& f) {
          auto decoded = Verify(f.payload);
          if (decoded) Record(decoded->seq, decoded->capture_ts_us, f.display_us, f.rebuffered);
        });
    sender_conn_->Attach(rev_.get(), [this](smt::SmtEvent&& e) {
      if (e.kind == smt::SmtEvent::Kind::kStreamData) origin_->OnStreamData(e.stream_id, e.data);
    });
    receiver_conn_->Attach(fwd_.get(), [this](smt::SmtEvent&& e) {
      if (e.kind == smt::SmtEvent::Kind::kConnectionError) throw Error(ErrorCode::kProtocol, e.error);
      if (e.kind == smt::SmtEvent::Kind::kStreamData) player_->OnStreamData(e.stream_id, e.data);
    });
    player_->Start([this] { setup_done_ = true; },
                   [this](const std::string& m) {
                     if (setup_done_) throw Error(ErrorCode::kProtocol, m);
                     setup_error_ = m;
                   });
  }

  void MakeConnections(bool sender_is_client) {
    smt::SmtConfig client = cfg_.smt;
    client.server = false;
    smt::SmtConfig server = cfg_.smt;
    server.server = true;
    sender_conn_ = std::make_unique<smt::SmtConnection>(loop_, fwd_.get(),
                                                        sender_is_client ? client : server);
    receiver_conn_ = std::make_unique<smt::SmtConnection>(loop_, rev_.get(),
                                                          sender_is_client ? server : client);
  }

  void MakeJitter() {
    jitter_ = std::make_unique<JitterStage>(
        loop_, cfg_.player.jitter, [this](media::AccessUnit&& au, int64_t now) {
          Record(au.seq, au.capture_ts_us, now, false);
        });
  }

  void MakeRtpReceiver() {
    MakeJitter();
    rtp_rx_ = std::make_unique<RtpReceiver>(loop_, [this](rtp::ReassembledAu&& r) {
      auto decoded = Verify(r.payload);
      if (!decoded) return;
      media::AccessUnit au;
      au.seq = decoded->seq;
      au.pts_90k = unwrapper_.Unwrap(r.rtp_timestamp);
      au.dts_90k = au.pts_90k;
      au.capture_ts_us = decoded->capture_ts_us;
      jitter_->Insert(std::move(au), r.first_arrival_us);
    });
  }

  std::optional<media::DecodedAu> Verify(ByteView payload) {
    media::DecodedAu d;
    try {
      d = media::DecodeVerify(payload, seed_);
    } catch (const MalformedError&) {
      d.verified = false;
    }
    if (!d.verified) {
      ++result_.corrupted;
      return std::nullopt;
    }
    return d;
  }

  void Record(int64_t seq, int64_t capture_us, int64_t display_loop_us, bool rebuffered) {
    if (display_loop_us > end_) return;
    if (seq < 0 || seq >= frames_ || !sampled_.insert(seq).second) return;
    LatencySample s;
    s.seq = seq;
    s.capture_ts_us = capture_us;
    s.display_ts_us = display_loop_us + rx_base_ + est_offset_;
    s.latency_us = s.display_ts_us - capture_us;
    s.rebuffered = rebuffered;
    result_.samples.push_back(s);
  }

  int64_t DrainUs() const {
    if (path_ == ProtocolPath::kDash || path_ == ProtocolPath::kLlDash) {
      const double target = cfg_.player.BufferTarget(path_ == ProtocolPath::kLlDash);
      return static_cast<int64_t>((target + 2 * cfg_.segment_duration_s + 5.0) * 1e6);
    }
    return 1'000'000 + cfg_.player.jitter.max_late_ms * 1000;
  }

  void RunStream() {
    RunPhase("stream", [&] {
      if (cfg_.ingest == media::IngestMode::kPipe) pipe_ = std::make_unique<PipeAdapter>();
      for (auto [start, end] : cfg_.forward_outages) {
        fwd_->link().AddOutage(stream_start_ + start, stream_start_ + end);
      }
      const int fps = cfg_.encoder.fps;
      for (int64_t seq = 0; seq < frames_; ++seq) {
        loop_->PostAt(stream_start_ + seq * 1'000'000 / fps, [this, seq] { Capture(seq); });
      }
      const int64_t stream_end = stream_start_ + frames_ * 1'000'000 / fps;
      end_ = stream_end + DrainUs();
      RunTo(end_);
      if (player_) player_->Stop();
    });
  }

  void Capture(int64_t seq) {
    result_.stages[seq].capture_us = SenderNow();
    loop_->PostAfter(cfg_.encode_cost_us, [this, seq] { Encode(seq); });
  }

  void Encode(int64_t seq) {
    StageTimes& st = result_.stages[seq];
    media::AccessUnit au = media::MakeAccessUnit(cfg_.encoder, seed_, seq, st.capture_us);
    if (pipe_) au = pipe_->Pass(au);
    st.encoded_us = SenderNow();
    loop_->PostAfter(cfg_.package_cost_us,
                     [this, au = std::move(au)]() mutable { Package(std::move(au)); });
  }

  void Package(media::AccessUnit au) {
    const int64_t seq = au.seq;
    StageTimes& st = result_.stages[seq];
    st.packaged_us = SenderNow();
    const bool last = seq + 1 == frames_;
    switch (path_) {
      case ProtocolPath::kRtpUdp:
        for (const auto& p : rtp_packager_->Package(au)) fwd_->Send(p.Serialize());
        st.sent_us = SenderNow();
        break;
      case ProtocolPath::kRtpSmt:
        result_.stream_offsets[seq] = smt_written_;
        for (const auto& p : rtp_packager_->Package(au)) {
          Bytes wire = p.Serialize();
          Bytes framed{static_cast<uint8_t>(wire.size() >> 8), static_cast<uint8_t>(wire.size())};
          framed.insert(framed.end(), wire.begin(), wire.end());
          sender_conn_->StreamSend(rtp_stream_, framed);
          smt_written_ += framed.size();
        }
        st.sent_us = SenderNow();
        break;
      case ProtocolPath::kMoqLite:
        publisher_->PublishAu(au);
        result_.group_streams[seq / cfg_.encoder.gop_length] = publisher_->last_stream_id();
        st.sent_us = SenderNow();
        if (last) publisher_->Finish();
        break;
      case ProtocolPath::kDash:
      case ProtocolPath::kLlDash: {
        pending_seqs_.push_back(seq);
        auto fragments = segment_packager_->Add(au);
        if (last) {
          for (auto& f : segment_packager_->Flush()) fragments.push_back(std::move(f));
        }
        for (const auto& f : fragments) origin_->AddFragment(f);
        if (!fragments.empty()) {
          for (int64_t s : pending_seqs_) result_.stages[s].sent_us = SenderNow();
          pending_seqs_.clear();
        }
        if (last) origin_->Finish();
        break;
      }
    }
  }

  void Collect() {
    std::sort(result_.samples.begin(), result_.samples.end(),
              [](const LatencySample& a, const LatencySample& b) { return a.seq < b.seq; });
    if (subscriber_) {
      for (int64_t seq : subscriber_->skipped()) {
        if (seq < frames_ && !sampled_.count(seq)) ++result_.skipped;
      }
    }
    result_.lost =
        result_.sent - static_cast<int64_t>(result_.samples.size()) - result_.skipped;
    if (player_) {
      result_.rebuffers = player_->rebuffers();
      for (auto& r : result_.rebuffers) r.at_us += sender_base_;
      result_.fetches = player_->fetches();
      for (auto& f : result_.fetches) {
        f.requested_us += sender_base_;
        if (f.completed_us) f.completed_us += sender_base_;
      }
    }
    if (sender_conn_) result_.retransmissions = sender_conn_->retransmissions();
  }

  ProtocolPath path_;
  netem::NetProfile profile_;
  PathConfig cfg_;
  double duration_s_;
  uint64_t seed_;
  int64_t frames_ = 0;

  std::unique_ptr<sim::VirtualScheduler> vloop_;
  std::unique_ptr<sim::RealtimeLoop> rloop_;
  sim::EventLoop* loop_ = nullptr;
  int64_t sender_base_ = 0;
  int64_t rx_base_ = 0;
  int64_t est_offset_ = 0;
  int64_t stream_start_ = 0;
  int64_t end_ = 0;

  std::unique_ptr<netem::DatagramChannel> fwd_, rev_, sync_fwd_, sync_rev_;
  std::unique_ptr<smt::SmtConnection> sender_conn_, receiver_conn_;
  bool setup_done_ = false;
  std::string setup_error_;

  std::optional<RtpPackager> rtp_packager_;
  std::unique_ptr<JitterStage> jitter_;
  std::unique_ptr<RtpReceiver> rtp_rx_;
  rtp::TimestampUnwrapper unwrapper_;
  uint32_t rtp_stream_ = 0;
  uint64_t smt_written_ = 0;
  Bytes framed_;

  std::unique_ptr<moq::Publisher> publisher_;
  std::unique_ptr<moq::Subscriber> subscriber_;

  std::optional<SegmentPackager> segment_packager_;
  std::unique_ptr<LiveOrigin> origin_;
  std::unique_ptr<DashPlayer> player_;
  std::vector<int64_t> pending_seqs_;

  std::unique_ptr<PipeAdapter> pipe_;
  std::set<int64_t> sampled_;
  RunResult result_;
};

}  // namespace

const char* PathName(ProtocolPath path) {
  switch (path) {
    case ProtocolPath::kRtpUdp:
      return "rtp-udp";
    case ProtocolPath::kRtpSmt:
      return "rtp-smt";
    case ProtocolPath::kMoqLite:
      return "moq";
    case ProtocolPath::kDash:
      return "dash";
    case ProtocolPath::kLlDash:
      return "lldash";
  }
  return "?";
}

ProtocolPath ParsePath(const std::string& name) {
  for (ProtocolPath p : kAllPaths) {
    if (name == PathName(p)) return p;
  }
  throw Error(ErrorCode::kPrecondition, "unknown path '" + name + "'");
}

void PathConfig::Validate() const {
  encoder.Validate();
  player.Validate();
  if (encode_cost_us < 0 || package_cost_us < 0) {
    throw Error(ErrorCode::kPrecondition, "stage costs must be >= 0");
  }
  if (rtp_mtu_payload < rtp::kMinMtuPayload || rtp_mtu_payload > 65000) {
    throw Error(ErrorCode::kPrecondition, "rtp_mtu_payload out of range");
  }
}

RunResult RunPath(ProtocolPath path, const netem::NetProfile& profile, const PathConfig& cfg,
                  double duration_s, uint64_t seed) {
  if (!(duration_s >= 5)) throw Error(ErrorCode::kPrecondition, "duration_s must be >= 5");
  cfg.Validate();
  profile.Validate();
  PathRun run(path, profile, cfg, duration_s, seed);
  return run.Run();
}

std::string SamplesCsv(const RunResult& result) {
  std::ostringstream out;
  out << "seq,capture_us,display_us,latency_us\n";
  for (const auto& s : result.samples) {
    out << s.seq << ',' << s.capture_ts_us << ',' << s.display_ts_us << ',' << s.latency_us
        << '\n';
  }
  return out.str();
}

nlohmann::json RunJson(const RunResult& result, const PathConfig& cfg) {
  nlohmann::json j;
  j["path"] = PathName(result.path);
  j["profile"] = result.profile;
  j["seed"] = result.seed;
  j["duration_s"] = result.duration_s;
  j["config"] = {
      {"gop_length", cfg.encoder.gop_length},
      {"bitrate_bps", cfg.encoder.bitrate_bps},
      {"fps", cfg.encoder.fps},
      {"width", cfg.width},
      {"height", cfg.height},
      {"segment_duration_s", cfg.segment_duration_s},
      {"fragment_duration_s", cfg.fragment_duration_s},
      {"buffer_target_s", cfg.player.BufferTarget(result.path == ProtocolPath::kLlDash)},
      {"poll_interval_ms", cfg.player.poll_interval_ms},
      {"jitter_target_ms", cfg.player.jitter.target_delay_ms},
      {"jitter_max_late_ms", cfg.player.jitter.max_late_ms},
      {"encode_cost_us", cfg.encode_cost_us},
      {"package_cost_us", cfg.package_cost_us},
      {"ingest", media::IngestModeName(cfg.ingest)},
      {"realtime", cfg.realtime},
  };
  int64_t rebuffered = 0;
  for (const auto& s : result.samples) rebuffered += s.rebuffered ? 1 : 0;
  j["counters"] = {
      {"sent", result.sent},
      {"delivered", static_cast<int64_t>(result.samples.size())},
      {"lost", result.lost},
      {"skipped", result.skipped},
      {"corrupted", result.corrupted},
      {"rebuffer_events", static_cast<int64_t>(result.rebuffers.size())},
      {"rebuffered_samples", rebuffered},
      {"retransmissions", static_cast<int64_t>(result.retransmissions.size())},
  };
  j["clock"] = {{"offset_us", result.clock.offset_us},
                {"rtt_us", result.clock.rtt_us},
                {"samples_used", result.clock.samples_used}};
  return j;
}

void WriteRunOutputs(const RunResult& result, const PathConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(std::filesystem::path(dir) / "samples.csv");
  csv << SamplesCsv(result);
  std::ofstream json(std::filesystem::path(dir) / "run.json");
  json << RunJson(result, cfg).dump(2) << '\n';
  if (!csv || !json) throw Error(ErrorCode::kIo, "cannot write run outputs to " + dir);
}

}  // namespace rrsb::paths
