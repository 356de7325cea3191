#include <random>
#include <string>

#include "gtest/gtest.h"
#include "rrsb/common/error.h"
#include "rrsb/http/http.h"

namespace rrsb::http {
namespace {

Bytes Text(const std::string& s) { return Bytes(s.begin(), s.end()); }

Bytes Body(std::size_t n, int tag) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<uint8_t>(i * 13 + tag);
  return b;
}

std::vector<ResponseEvent> FeedInPieces(ResponseParser& p, const Bytes& wire, std::mt19937& rng) {
  std::vector<ResponseEvent> events;
  std::size_t pos = 0;
  while (pos < wire.size()) {
    const std::size_t n = std::min<std::size_t>(wire.size() - pos, 1 + rng() % 40);
    for (auto& e : p.Feed(ByteView(wire).subspan(pos, n))) events.push_back(std::move(e));
    pos += n;
  }
  return events;
}

TEST(HttpRequestTest, SerializeAndParse) {
  Bytes wire = SerializeRequest({"GET", "/seg-12.m4s"});
  EXPECT_EQ(std::string(wire.begin(), wire.end()),
            "GET /seg-12.m4s HTTP/1.1\r\nHost: origin\r\n\r\n");
  Bytes two = wire;
  Bytes more = SerializeRequest({"GET", "/live.mpd"});
  two.insert(two.end(), more.begin(), more.end());
  RequestParser parser;
  std::vector<Request> got;
  for (uint8_t b : two) {
    for (auto& r : parser.Feed(ByteView(&b, 1))) got.push_back(r);
  }
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].path, "/seg-12.m4s");
  EXPECT_EQ(got[1].path, "/live.mpd");
}

TEST(HttpRequestTest, BadRequestLine) {
  RequestParser parser;
  EXPECT_THROW(parser.Feed(Text("GET /x HTTP/1.0\r\n\r\n")), MalformedError);
}

TEST(HttpChunkTest, Encoding) {
  Bytes c = EncodeChunk(Text("hello world, 26 bytes long"));
  EXPECT_EQ(std::string(c.begin(), c.end()), "1a\r\nhello world, 26 bytes long\r\n");
  Bytes last = EncodeChunk({});
  EXPECT_EQ(std::string(last.begin(), last.end()), "0\r\n\r\n");
}

TEST(HttpResponseTest, ContentLengthInPieces) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Bytes body = Body(rng() % 3000, trial);
    Bytes wire = SerializeResponse(200, body, "video/mp4");
    ResponseParser p;
    auto events = FeedInPieces(p, wire, rng);
    ASSERT_GE(events.size(), 2u);
    EXPECT_EQ(events.front().kind, ResponseEvent::Kind::kHead);
    EXPECT_EQ(events.front().status, 200);
    EXPECT_FALSE(events.front().chunked);
    EXPECT_EQ(events.back().kind, ResponseEvent::Kind::kDone);
    Bytes got;
    for (auto& e : events) {
      if (e.kind == ResponseEvent::Kind::kBody) got.insert(got.end(), e.data.begin(), e.data.end());
    }
    EXPECT_EQ(got, body);
    EXPECT_TRUE(p.done());
  }
}

TEST(HttpResponseTest, ChunksArriveWhole) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Bytes> chunks;
    Bytes wire = SerializeChunkedHead(200, "video/mp4");
    for (int i = 0, n = 1 + trial % 5; i < n; ++i) {
      chunks.push_back(Body(1 + rng() % 2000, i));
      Bytes c = EncodeChunk(chunks.back());
      wire.insert(wire.end(), c.begin(), c.end());
    }
    Bytes last = EncodeChunk({});
    wire.insert(wire.end(), last.begin(), last.end());
    ResponseParser p;
    auto events = FeedInPieces(p, wire, rng);
    ASSERT_EQ(events.size(), chunks.size() + 2);
    EXPECT_TRUE(events[0].chunked);
    for (std::size_t i = 0; i < chunks.size(); ++i) EXPECT_EQ(events[i + 1].data, chunks[i]);
    EXPECT_EQ(events.back().kind, ResponseEvent::Kind::kDone);
  }
}

TEST(HttpResponseTest, NotFound) {
  Bytes wire = SerializeResponse(404, {}, "text/plain");
  ResponseParser p;
  auto events = p.Feed(wire);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].status, 404);
  EXPECT_EQ(events[1].kind, ResponseEvent::Kind::kDone);
}

TEST(HttpResponseTest, MalformedInputs) {
  {
    ResponseParser p;
    EXPECT_THROW(p.Feed(Text("HTTP/1.1 2x0 OK\r\n\r\n")), MalformedError);
  }
  {
    ResponseParser p;
    EXPECT_THROW(p.Feed(Text("HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\nzz\r\n")),
                 MalformedError);
  }
  {
    ResponseParser p;
    try {
      p.Feed(Text("HTTP/1.1 200 OK\r\nTransfer-Encoding: chunked\r\n\r\n2\r\nabXY"));
      FAIL();
    } catch (const MalformedError& e) {
      EXPECT_EQ(e.offset(), 52u);  // head 47, size line 3, "ab" 2
    }
  }
}

}  // namespace
}  // namespace rrsb::http
