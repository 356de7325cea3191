#ifndef RRSB_PATHS_PACKAGER_H_
#define RRSB_PATHS_PACKAGER_H_

#include <cstdint>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/dash/mpd.h"
#include "rrsb/media/types.h"
#include "rrsb/rtp/rtp_packet.h"

namespace rrsb::paths {

inline constexpr uint8_t kRtpPayloadType = 96;
inline constexpr uint32_t kRtpSsrc = 0x52525342;

// Keeps the RTP sequence counter across access units.
class RtpPackager {
 public:
  explicit RtpPackager(std::size_t mtu_payload, uint16_t first_seq = 0)
      : mtu_(mtu_payload), next_seq_(first_seq) {}
  std::vector<rtp::RtpPacket> Package(const media::AccessUnit& au);

 private:
  std::size_t mtu_;
  uint16_t next_seq_;
};

struct PackagedFragment {
  int64_t segment_number = 0;  // 1-based
  int fragment_index = 0;      // 0-based within the segment
  Bytes bytes;                 // styp + moof + mdat
  bool segment_complete = false;
};

// Cuts the AU stream into fMP4 units. DASH emits one fragment per segment when
// the segment's last frame arrives; LL-DASH one fragment per fragment period.
// Frame `seq` belongs to the period starting at seq / fps.
class SegmentPackager {
 public:
  explicit SegmentPackager(const dash::MpdConfig& cfg);

  std::vector<PackagedFragment> Add(const media::AccessUnit& au);
  // Emits the partial unit, if any, and marks its segment complete.
  std::vector<PackagedFragment> Flush();

 private:
  PackagedFragment Cut(bool segment_complete);

  dash::MpdConfig cfg_;
  int frames_per_unit_;
  std::vector<media::AccessUnit> pending_;
  int64_t segment_ = 1;  // unit of pending_ (or the last unit cut)
  int fragment_index_ = 0;
  uint32_t next_fragment_seq_ = 1;
};

// Round-trips each AU through an OS pipe as a SerializeAu record, as the
// pipe ingest mode does between encoder and packager.
class PipeAdapter {
 public:
  PipeAdapter();  // raises kIo if the pipe cannot be created
  ~PipeAdapter();
  PipeAdapter(const PipeAdapter&) = delete;
  PipeAdapter& operator=(const PipeAdapter&) = delete;

  media::AccessUnit Pass(const media::AccessUnit& au);
  int64_t bytes() const { return bytes_; }

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  int64_t bytes_ = 0;
};

}  // namespace rrsb::paths

#endif  // RRSB_PATHS_PACKAGER_H_
