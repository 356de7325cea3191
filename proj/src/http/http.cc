#include "rrsb/http/http.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <string_view>

#include "rrsb/common/error.h"

namespace rrsb::http {
namespace {

constexpr std::string_view kCrlf = "\r\n";

void AppendText(Bytes* out, std::string_view text) {
  out->insert(out->end(), text.begin(), text.end());
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Finds "\r\n" in `buf` starting at `from`.
std::optional<std::size_t> FindCrlf(const Bytes& buf, std::size_t from) {
  for (std::size_t i = from; i + 1 < buf.size(); ++i) {
    if (buf[i] == '\r' && buf[i + 1] == '\n') return i;
  }
  return std::nullopt;
}

}  // namespace

Bytes SerializeRequest(const Request& req) {
  Bytes out;
  AppendText(&out, req.method + " " + req.path + " HTTP/1.1\r\nHost: origin\r\n\r\n");
  return out;
}

std::vector<Request> RequestParser::Feed(ByteView data) {
  buffer_.append(data.begin(), data.end());
  std::vector<Request> out;
  std::size_t end;
  while ((end = buffer_.find("\r\n\r\n")) != std::string::npos) {
    std::string_view head(buffer_.data(), end);
    std::string_view line = head.substr(0, head.find(kCrlf));
    const std::size_t sp1 = line.find(' ');
    const std::size_t sp2 = line.rfind(' ');
    if (sp1 == std::string_view::npos || sp2 == sp1 || line.substr(sp2 + 1) != "HTTP/1.1") {
      throw MalformedError("bad request line '" + std::string(line) + "'", 0);
    }
    Request r;
    r.method = std::string(line.substr(0, sp1));
    r.path = std::string(line.substr(sp1 + 1, sp2 - sp1 - 1));
    out.push_back(std::move(r));
    buffer_.erase(0, end + 4);
  }
  return out;
}

const char* ReasonPhrase(int status) {
  switch (status) {
    case 200:
      return "OK";
    case 404:
      return "Not Found";
    case 405:
      return "Method Not Allowed";
    default:
      return "Unknown";
  }
}

Bytes SerializeResponse(int status, ByteView body, const std::string& content_type) {
  Bytes out;
  AppendText(&out, "HTTP/1.1 " + std::to_string(status) + " " + ReasonPhrase(status) +
                       "\r\nContent-Type: " + content_type +
                       "\r\nContent-Length: " + std::to_string(body.size()) + "\r\n\r\n");
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes SerializeChunkedHead(int status, const std::string& content_type) {
  Bytes out;
  AppendText(&out, "HTTP/1.1 " + std::to_string(status) + " " + ReasonPhrase(status) +
                       "\r\nContent-Type: " + content_type +
                       "\r\nTransfer-Encoding: chunked\r\n\r\n");
  return out;
}

Bytes EncodeChunk(ByteView data) {
  char size[20];
  const int n = std::snprintf(size, sizeof(size), "%zx\r\n", data.size());
  Bytes out(size, size + n);
  out.insert(out.end(), data.begin(), data.end());
  AppendText(&out, kCrlf);
  return out;
}

std::vector<ResponseEvent> ResponseParser::Feed(ByteView data) {
  buffer_.insert(buffer_.end(), data.begin(), data.end());
  std::vector<ResponseEvent> out;
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> void {
    throw MalformedError(what, consumed_ + pos);
  };
  bool progress = true;
  while (progress) {
    progress = false;
    switch (state_) {
      case State::kHead: {
        std::optional<std::size_t> end;
        for (std::size_t i = pos; i + 3 < buffer_.size(); ++i) {
          if (buffer_[i] == '\r' && buffer_[i + 1] == '\n' && buffer_[i + 2] == '\r' &&
              buffer_[i + 3] == '\n') {
            end = i;
            break;
          }
        }
        if (!end) break;
        std::string_view head(reinterpret_cast<const char*>(buffer_.data()) + pos, *end - pos);
        std::string_view line = head.substr(0, head.find(kCrlf));
        if (line.size() < 12 || line.substr(0, 9) != "HTTP/1.1 ") fail("bad status line");
        ResponseEvent ev;
        auto [p, ec] = std::from_chars(line.data() + 9, line.data() + 12, ev.status);
        if (ec != std::errc() || p != line.data() + 12) fail("bad status code");
        std::optional<uint64_t> length;
        std::size_t at = line.size() + 2;
        while (at < head.size()) {
          std::size_t eol = head.find(kCrlf, at);
          if (eol == std::string_view::npos) eol = head.size();
          std::string_view h = head.substr(at, eol - at);
          const std::size_t colon = h.find(':');
          if (colon == std::string_view::npos) fail("bad header line");
          const std::string name = Lower(Trim(h.substr(0, colon)));
          const std::string_view value = Trim(h.substr(colon + 1));
          if (name == "content-length") {
            uint64_t v = 0;
            auto [q, e] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (e != std::errc() || q != value.data() + value.size()) fail("bad content-length");
            length = v;
          } else if (name == "transfer-encoding") {
            if (Lower(value) != "chunked") fail("unsupported transfer-encoding");
            ev.chunked = true;
          }
          at = eol + 2;
        }
        pos = *end + 4;
        out.push_back(ev);
        if (ev.chunked) {
          state_ = State::kChunkSize;
        } else {
          remaining_ = length.value_or(0);
          state_ = State::kBody;
        }
        progress = true;
        break;
      }
      case State::kBody: {
        const uint64_t take = std::min<uint64_t>(remaining_, buffer_.size() - pos);
        if (take > 0) {
          ResponseEvent ev;
          ev.kind = ResponseEvent::Kind::kBody;
          ev.data.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(pos),
                         buffer_.begin() + static_cast<std::ptrdiff_t>(pos + take));
          out.push_back(std::move(ev));
          pos += take;
          remaining_ -= take;
        }
        if (remaining_ == 0) {
          out.push_back({ResponseEvent::Kind::kDone});
          state_ = State::kDone;
        }
        break;
      }
      case State::kChunkSize: {
        auto eol = FindCrlf(buffer_, pos);
        if (!eol) break;
        const char* first = reinterpret_cast<const char*>(buffer_.data()) + pos;
        const char* last = reinterpret_cast<const char*>(buffer_.data()) + *eol;
        const char* ext = std::find(first, last, ';');
        uint64_t size = 0;
        auto [p, ec] = std::from_chars(first, ext, size, 16);
        if (ec != std::errc() || p != ext || first == ext) fail("bad chunk size");
        pos = *eol + 2;
        remaining_ = size;
        state_ = size == 0 ? State::kTrailer : State::kChunkData;
        progress = true;
        break;
      }
      case State::kChunkData: {
        if (buffer_.size() - pos < remaining_) break;
        ResponseEvent ev;
        ev.kind = ResponseEvent::Kind::kBody;
        ev.data.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(pos),
                       buffer_.begin() + static_cast<std::ptrdiff_t>(pos + remaining_));
        out.push_back(std::move(ev));
        pos += remaining_;
        state_ = State::kChunkEnd;
        progress = true;
        break;
      }
      case State::kChunkEnd: {
        if (buffer_.size() - pos < 2) break;
        if (buffer_[pos] != '\r' || buffer_[pos + 1] != '\n') fail("chunk not followed by CRLF");
        pos += 2;
        state_ = State::kChunkSize;
        progress = true;
        break;
      }
      case State::kTrailer: {
        auto eol = FindCrlf(buffer_, pos);
        if (!eol) break;
        const bool empty = *eol == pos;
        pos = *eol + 2;
        if (empty) {
          out.push_back({ResponseEvent::Kind::kDone});
          state_ = State::kDone;
        }
        progress = true;
        break;
      }
      case State::kDone:
        if (pos < buffer_.size()) fail("data after end of response");
        break;
    }
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  consumed_ += pos;
  return out;
}

}  // namespace rrsb::http
