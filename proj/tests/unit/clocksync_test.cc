#include "gtest/gtest.h"
#include "rrsb/clocksync/clocksync.h"
#include "rrsb/common/error.h"
#include "rrsb/netem/channel.h"

namespace rrsb::clocksync {
namespace {

TEST(EstimateOffsetTest, Formula) {
  auto e = EstimateOffset({100, 150, 152, 112});
  EXPECT_EQ(e.offset_us, 45);
  EXPECT_EQ(e.rtt_us, 10);
  e = EstimateOffset({0, 50, 50, 100});
  EXPECT_EQ(e.offset_us, 0);
  EXPECT_EQ(e.rtt_us, 100);
}

TEST(EstimateOffsetTest, NegativeRttInvalid) {
  try {
    EstimateOffset({0, 10, 12, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSample);
  }
}

TEST(SyncMessageTest, RoundTrip) {
  auto req = ParseSyncMessage(EncodeRequest(-5));
  ASSERT_TRUE(req);
  EXPECT_EQ(req->type, kRequestType);
  EXPECT_EQ(req->t1, -5);
  auto rep = ParseSyncMessage(EncodeReply(1, 2, 3));
  ASSERT_TRUE(rep);
  EXPECT_EQ(rep->type, kReplyType);
  EXPECT_EQ(rep->t3, 3);
  EXPECT_EQ(EncodeRequest(1)[0], 0x51);
  EXPECT_EQ(EncodeReply(1, 2, 3)[0], 0x52);
  EXPECT_FALSE(ParseSyncMessage(Bytes{0x51, 1}));
}

struct Handshake {
  std::optional<ClockEstimate> estimate;
  std::exception_ptr error;
};

// Client and server hosts whose clocks differ by `true_offset` (server ahead).
Handshake RunHandshake(const netem::NetProfile& fwd, const netem::NetProfile& back, int64_t true_offset,
              HandshakeConfig cfg = {}) {
  sim::VirtualScheduler s(1'000'000);
  netem::SimChannel c2s(&s, fwd), s2c(&s, back);
  SyncServer server(sim::LocalClock(&s, true_offset), [&](Bytes b) { s2c.Send(std::move(b)); });
  SyncClient client(&s, sim::LocalClock(&s, 0), [&](Bytes b) { c2s.Send(std::move(b)); }, cfg);
  c2s.SetReceiver([&](Bytes b, int64_t) { server.OnDatagram(b); });
  s2c.SetReceiver([&](Bytes b, int64_t) { client.OnDatagram(b); });
  Handshake h;
  client.Start([&](const ClockEstimate* e, const std::exception_ptr& err) {
    if (e) h.estimate = *e;
    h.error = err;
  });
  s.RunUntil([&] { return client.finished(); }, 60'000'000);
  return h;
}

TEST(HandshakeTest, ZeroJitterIsExact) {
  for (int64_t delay : {100, 2000, 15000, 123457}) {
    auto p = netem::ZeroImpairment(delay, 1'000'000'000);
    auto h = RunHandshake(p, p, 1000);
    ASSERT_TRUE(h.estimate);
    EXPECT_EQ(h.estimate->offset_us, 1000);
    EXPECT_EQ(h.estimate->samples_used, 8);
  }
}

TEST(HandshakeTest, JitterBoundsError) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    auto p = netem::ZeroImpairment(10'000, 1'000'000'000);
    p.jitter_us = 5000;
    p.seed = seed;
    auto back = p;
    back.seed = seed + 100;
    auto h = RunHandshake(p, back, -250'000);
    ASSERT_TRUE(h.estimate);
    EXPECT_LE(std::abs(h.estimate->offset_us + 250'000), 5000);
  }
}

TEST(HandshakeTest, ZeroRoundsRejected) {
  sim::VirtualScheduler s;
  HandshakeConfig cfg;
  cfg.rounds = 0;
  EXPECT_THROW(SyncClient(&s, sim::LocalClock(&s, 0), [](Bytes) {}, cfg), Error);
}

TEST(HandshakeTest, LostRoundsSkipped) {
  auto p = netem::ZeroImpairment(1000, 1'000'000'000);
  auto lossy = p;
  lossy.loss_rate = 0.5;
  lossy.seed = 3;
  auto h = RunHandshake(lossy, p, 77);
  ASSERT_TRUE(h.estimate);
  EXPECT_EQ(h.estimate->offset_us, 77);
  EXPECT_LT(h.estimate->samples_used, 8);
}

TEST(HandshakeTest, AllLostTimesOut) {
  auto p = netem::ZeroImpairment(1000, 1'000'000'000);
  auto dead = p;
  dead.loss_rate = 1;
  auto h = RunHandshake(dead, p, 0);
  EXPECT_FALSE(h.estimate);
  ASSERT_TRUE(h.error);
  try {
    std::rethrow_exception(h.error);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeout);
  }
}

}  // namespace
}  // namespace rrsb::clocksync
