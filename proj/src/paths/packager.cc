#include "rrsb/paths/packager.h"

#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "rrsb/common/error.h"
#include "rrsb/isobmff/mp4.h"
#include "rrsb/media/au_record.h"

namespace rrsb::paths {

std::vector<rtp::RtpPacket> RtpPackager::Package(const media::AccessUnit& au) {
  auto packets = rtp::Packetize(au, mtu_, kRtpPayloadType, kRtpSsrc, next_seq_);
  next_seq_ = static_cast<uint16_t>(next_seq_ + packets.size());
  return packets;
}

SegmentPackager::SegmentPackager(const dash::MpdConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  frames_per_unit_ = cfg_.low_latency ? cfg_.frames_per_fragment() : cfg_.frames_per_segment();
}

PackagedFragment SegmentPackager::Cut(bool segment_complete) {
  PackagedFragment f;
  f.segment_number = segment_;
  f.fragment_index = fragment_index_;
  f.bytes = isobmff::BuildFragment(pending_, next_fragment_seq_++, cfg_.fps).bytes;
  f.segment_complete = segment_complete;
  pending_.clear();
  return f;
}

std::vector<PackagedFragment> SegmentPackager::Add(const media::AccessUnit& au) {
  std::vector<PackagedFragment> out;
  const int per_segment = cfg_.frames_per_segment();
  const int64_t segment = dash::SegmentForFrame(au.seq, cfg_.fps, cfg_);
  const int index = static_cast<int>((au.seq % per_segment) / frames_per_unit_);
  if (std::pair(segment, index) < std::pair(segment_, fragment_index_) ||
      (!pending_.empty() && au.seq <= pending_.back().seq)) {
    throw Error(ErrorCode::kOrdering, "AU " + std::to_string(au.seq) + " is behind the packager");
  }
  // A frame dropped upstream can leave a unit short; close it on the next one.
  if (!pending_.empty() && std::pair(segment, index) != std::pair(segment_, fragment_index_)) {
    out.push_back(Cut(segment != segment_ || !cfg_.low_latency));
  }
  segment_ = segment;
  fragment_index_ = index;
  pending_.push_back(au);
  if ((au.seq + 1) % frames_per_unit_ == 0) {
    out.push_back(Cut((au.seq + 1) % per_segment == 0));
  }
  return out;
}

std::vector<PackagedFragment> SegmentPackager::Flush() {
  std::vector<PackagedFragment> out;
  if (!pending_.empty()) out.push_back(Cut(true));
  return out;
}

PipeAdapter::PipeAdapter() {
  int fds[2];
  if (pipe(fds) != 0) throw Error(ErrorCode::kIo, std::string("pipe: ") + std::strerror(errno));
  read_fd_ = fds[0];
  write_fd_ = fds[1];
}

PipeAdapter::~PipeAdapter() {
  close(read_fd_);
  close(write_fd_);
}

media::AccessUnit PipeAdapter::Pass(const media::AccessUnit& au) {
  const Bytes record = media::SerializeAu(au);
  Bytes back(record.size());
  // Stay below the pipe buffer so one thread can do both ends.
  constexpr std::size_t kPiece = 16 * 1024;
  for (std::size_t pos = 0; pos < record.size();) {
    const std::size_t n = std::min(kPiece, record.size() - pos);
    std::size_t written = 0;
    while (written < n) {
      const ssize_t w = write(write_fd_, record.data() + pos + written, n - written);
      if (w < 0 && errno != EINTR) throw Error(ErrorCode::kIo, "pipe write failed");
      if (w > 0) written += static_cast<std::size_t>(w);
    }
    std::size_t got = 0;
    while (got < n) {
      const ssize_t r = read(read_fd_, back.data() + pos + got, n - got);
      if (r < 0 && errno != EINTR) throw Error(ErrorCode::kIo, "pipe read failed");
      if (r == 0) throw Error(ErrorCode::kIo, "pipe closed");
      if (r > 0) got += static_cast<std::size_t>(r);
    }
    pos += n;
  }
  bytes_ += static_cast<int64_t>(record.size());
  return media::DeserializeAu(back);
}

}  // namespace rrsb::paths
