#include <random>

#include "gtest/gtest.h"
#include "rrsb/common/error.h"
#include "rrsb/netem/channel.h"
#include "rrsb/netem/link.h"
#include "rrsb/sim/event_loop.h"

namespace rrsb::netem {
namespace {

Bytes Payload(std::size_t n, uint32_t tag) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<uint8_t>((tag >> (8 * (i % 4))) + i);
  return b;
}

NetProfile Clean(int64_t delay_us, int64_t bw) {
  NetProfile p = ZeroImpairment(delay_us, bw);
  return p;
}

TEST(EmuLinkTest, SerializationPlusDelay) {
  EmuLink link(Clean(10'000, 9'600'000));
  auto r = link.Send(Payload(1200, 1), 5'000);
  EXPECT_FALSE(r.dropped);
  EXPECT_EQ(r.tx_done_us, 6'000);
  EXPECT_EQ(r.deliver_at_us, 16'000);
  EXPECT_TRUE(link.Poll(15'999).empty());
  auto got = link.Poll(16'000);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].data, Payload(1200, 1));
}

TEST(EmuLinkTest, SerializationQueuesFifo) {
  EmuLink link(Clean(10'000, 9'600'000));
  link.Send(Payload(1200, 1), 0);
  auto second = link.Send(Payload(1200, 2), 0);
  EXPECT_EQ(second.tx_done_us, 2'000);
  EXPECT_EQ(second.deliver_at_us, 12'000);
}

TEST(EmuLinkTest, TotalLoss) {
  NetProfile p = Clean(1000, 1'000'000'000);
  p.loss_rate = 1.0;
  EmuLink link(p);
  for (uint32_t i = 0; i < 100; ++i) EXPECT_TRUE(link.Send(Payload(100, i), i).dropped);
  EXPECT_TRUE(link.Poll(1'000'000'000).empty());
  EXPECT_EQ(link.dropped(), 100);
}

TEST(EmuLinkTest, OversizeRejected) {
  EmuLink link(Clean(0, 1'000'000));
  EXPECT_THROW(link.Send(Bytes(65508), 0), Error);
  EXPECT_NO_THROW(link.Send(Bytes(65507), 0));
}

TEST(EmuLinkTest, PollSemantics) {
  EmuLink link(Clean(1000, 1'000'000'000));
  EXPECT_TRUE(link.Poll(0).empty());
  link.Send(Payload(10, 1), 0);
  link.Send(Payload(10, 2), 0);
  EXPECT_TRUE(link.Poll(999).empty());
  auto got = link.Poll(5000);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].data, Payload(10, 1));
  EXPECT_EQ(got[1].data, Payload(10, 2));
}

// Zero-impairment profile: exact FIFO, latency = delay + serialization.
TEST(EmuLinkTest, CleanProfileIsConstantLatencyFifo) {
  EmuLink link(Clean(3000, 80'000'000));
  std::mt19937_64 rng(4);
  int64_t now = 0;
  std::vector<int64_t> expected;
  int64_t busy_until_ns = 0;
  for (uint32_t i = 0; i < 500; ++i) {
    now += static_cast<int64_t>(rng() % 500);
    const std::size_t len = 1 + rng() % 1500;
    link.Send(Payload(len, i), now);
    busy_until_ns = std::max(busy_until_ns, now * 1000) + static_cast<int64_t>(len) * 100;
    expected.push_back(busy_until_ns / 1000 + 3000);
  }
  auto got = link.Poll(INT64_MAX);
  ASSERT_EQ(got.size(), 500u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].deliver_at_us, expected[i]);
    EXPECT_EQ(got[i].data.size() > 0, true);
  }
}

std::vector<Datagram> RunSchedule(const NetProfile& p) {
  EmuLink link(p);
  std::mt19937_64 rng(99);
  for (uint32_t i = 0; i < 2000; ++i) {
    link.Send(Payload(1 + rng() % 1400, i), static_cast<int64_t>(i) * 300);
  }
  return link.Poll(INT64_MAX);
}

TEST(EmuLinkTest, SeedDeterminism) {
  NetProfile p = Profile("fiveg");
  p.reorder_rate = 0.05;
  p.seed = 12;
  auto a = RunSchedule(p);
  auto b = RunSchedule(p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].deliver_at_us, b[i].deliver_at_us);
    EXPECT_EQ(a[i].data, b[i].data);
  }
  p.seed = 13;
  auto c = RunSchedule(p);
  bool differs = a.size() != c.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) {
    differs = a[i].deliver_at_us != c[i].deliver_at_us;
  }
  EXPECT_TRUE(differs);
}

// Deliveries never precede send + serialization, and jitter stays bounded.
TEST(EmuLinkTest, DeliveryBounds) {
  for (uint64_t seed = 1; seed < 10; ++seed) {
    NetProfile p = Profile("wifi");
    p.reorder_rate = 0.1;
    p.seed = seed;
    EmuLink link(p);
    std::vector<SendResult> sends;
    for (uint32_t i = 0; i < 1000; ++i) sends.push_back(link.Send(Payload(1200, i), i * 40));
    for (const auto& d : link.Poll(INT64_MAX)) {
      const uint32_t i = static_cast<uint32_t>(d.sent_us / 40);
      EXPECT_GE(d.deliver_at_us, sends[i].tx_done_us);
      EXPECT_GE(d.deliver_at_us, d.sent_us);
    }
  }
}

TEST(EmuLinkTest, LossRateIsApproximate) {
  NetProfile p = Clean(0, 1'000'000'000);
  p.loss_rate = 0.05;
  EmuLink link(p);
  for (uint32_t i = 0; i < 20000; ++i) link.Send(Payload(64, i), i);
  // 5% of 20000 with a 5-sigma binomial tolerance.
  EXPECT_NEAR(static_cast<double>(link.dropped()), 1000.0, 5 * std::sqrt(20000 * 0.05 * 0.95));
}

// A datagram's random fate does not depend on unrelated traffic.
TEST(EmuLinkTest, DrawsIndependentOfOtherTraffic) {
  NetProfile p = Profile("fiveg");
  p.bandwidth_bps = 10'000'000'000'000;
  EmuLink a(p), b(p);
  std::vector<int64_t> ta, tb;
  for (uint32_t i = 0; i < 300; ++i) {
    ta.push_back(a.Send(Payload(500, i), i * 1000).deliver_at_us);
    if (i % 3 == 0) b.Send(Payload(700, 100000 + i), i * 1000);
    tb.push_back(b.Send(Payload(500, i), i * 1000).deliver_at_us);
  }
  EXPECT_EQ(ta, tb);
}

TEST(EmuLinkTest, OutageAndFilter) {
  EmuLink link(Clean(1000, 1'000'000'000));
  link.AddOutage(100, 200);
  link.SetDropFilter([](ByteView d, int64_t) { return d.size() == 7; });
  EXPECT_FALSE(link.Send(Payload(10, 1), 99).dropped);
  EXPECT_TRUE(link.Send(Payload(10, 2), 100).dropped);
  EXPECT_TRUE(link.Send(Payload(10, 3), 199).dropped);
  EXPECT_FALSE(link.Send(Payload(10, 4), 200).dropped);
  EXPECT_TRUE(link.Send(Payload(7, 5), 300).dropped);
}

TEST(EmuLinkTest, TraceCsv) {
  EmuLink link(Clean(1000, 8'000'000));
  link.EnableTrace();
  link.Send(Payload(100, 1), 0);
  link.Poll(10'000);
  EXPECT_EQ(link.TraceCsv(), "ts_us,event,bytes\n0,send,100\n1100,deliver,100\n");
}

TEST(ProfileTest, Presets) {
  EXPECT_EQ(Profile("wifi").one_way_delay_us, 2000);
  EXPECT_EQ(Profile("wifi").jitter_us, 1000);
  EXPECT_DOUBLE_EQ(Profile("wifi").loss_rate, 0.001);
  EXPECT_EQ(Profile("wifi").bandwidth_bps, 300'000'000);
  EXPECT_EQ(Profile("fiveg").one_way_delay_us, 15000);
  EXPECT_EQ(Profile("fiveg").jitter_us, 5000);
  EXPECT_DOUBLE_EQ(Profile("fiveg").loss_rate, 0.005);
  EXPECT_EQ(Profile("fiveg").bandwidth_bps, 75'000'000);
  try {
    Profile("lte");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownProfile);
  }
}

TEST(ProfileTest, JsonOverridesBase) {
  auto p = ProfileFromJson(nlohmann::json::parse(R"({"base": "wifi", "loss_rate": 0.005})"));
  EXPECT_EQ(p.one_way_delay_us, 2000);
  EXPECT_DOUBLE_EQ(p.loss_rate, 0.005);
  EXPECT_EQ(ProfileFromJson(ProfileToJson(p)), p);
  EXPECT_THROW(ProfileFromJson(nlohmann::json::parse(R"({"loss_rate": 2})")), Error);
  EXPECT_THROW(ProfileFromJson(nlohmann::json::parse(R"({"base": "lte"})")), Error);
}

TEST(VirtualSchedulerTest, OrdersByTimeThenPosting) {
  sim::VirtualScheduler s;
  std::vector<int> order;
  s.PostAt(20, [&] { order.push_back(3); });
  s.PostAt(10, [&] { order.push_back(1); });
  s.PostAt(10, [&] { order.push_back(2); });
  auto id = s.PostAt(15, [&] { order.push_back(99); });
  s.Cancel(id);
  s.RunUntil(100);
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(s.Now(), 100);
}

TEST(VirtualSchedulerTest, PredicateStopsEarly) {
  sim::VirtualScheduler s;
  int count = 0;
  std::function<void()> tick = [&] {
    ++count;
    s.PostAfter(10, tick);
  };
  s.PostAt(0, tick);
  EXPECT_TRUE(s.RunUntil([&] { return count == 5; }, 1000));
  EXPECT_EQ(s.Now(), 40);
  EXPECT_FALSE(s.RunUntil([&] { return count == 1000; }, 500));
}

TEST(SimChannelTest, DeliversAtScheduledTimes) {
  sim::VirtualScheduler s;
  NetProfile p = Profile("wifi");
  p.reorder_rate = 0.2;
  SimChannel ch(&s, p);
  EmuLink reference(p);
  std::vector<std::pair<int64_t, Bytes>> got;
  ch.SetReceiver([&](Bytes d, int64_t at) {
    EXPECT_EQ(at, s.Now());
    got.emplace_back(at, std::move(d));
  });
  for (uint32_t i = 0; i < 200; ++i) {
    s.PostAt(i * 100, [&ch, i] { ch.Send(Payload(300, i)); });
    reference.Send(Payload(300, i), i * 100);
  }
  s.RunUntil(10'000'000);
  auto expected = reference.Poll(INT64_MAX);
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].first, expected[i].deliver_at_us);
    EXPECT_EQ(got[i].second, expected[i].data);
  }
}

TEST(UdpChannelTest, LoopbackDelivery) {
  sim::RealtimeLoop loop;
  UdpChannel ch(&loop, Clean(2000, 1'000'000'000));
  std::vector<Bytes> got;
  const int64_t start = loop.Now();
  int64_t first_arrival = 0;
  ch.SetReceiver([&](Bytes d, int64_t at) {
    if (got.empty()) first_arrival = at;
    got.push_back(std::move(d));
  });
  for (uint32_t i = 0; i < 20; ++i) ch.Send(Payload(1000, i));
  loop.RunUntil([&] { return got.size() == 20; }, start + 2'000'000);
  ASSERT_EQ(got.size(), 20u);
  for (uint32_t i = 0; i < 20; ++i) EXPECT_EQ(got[i], Payload(1000, i));
  EXPECT_GE(first_arrival - start, 2000);
}

}  // namespace
}  // namespace rrsb::netem
