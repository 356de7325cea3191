#ifndef RRSB_MOQ_MOQ_H_
#define RRSB_MOQ_MOQ_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rrsb/common/byte_io.h"
#include "rrsb/media/types.h"
#include "rrsb/smt/connection.h"

namespace rrsb::moq {

inline constexpr uint32_t kControlStreamId = 1;
inline constexpr std::size_t kObjectHeaderSize = 20;

enum class ControlType : uint8_t { kAnnounce = 1, kSubscribe = 2 };

struct ControlMessage {
  ControlType type = ControlType::kAnnounce;
  uint32_t track_id = 0;
  std::string name;  // ANNOUNCE only, at most 255 bytes

  bool operator==(const ControlMessage&) const = default;
};

Bytes SerializeControl(const ControlMessage& m);

// Incremental parser for the control stream.
class ControlReader {
 public:
  // Raises MalformedError on an unknown message type.
  std::vector<ControlMessage> Feed(ByteView data);

 private:
  Bytes buffer_;
};

struct ObjectHeader {
  uint32_t track_id = 0;
  uint64_t group_id = 0;
  uint32_t object_id = 0;
  uint32_t payload_len = 0;

  bool operator==(const ObjectHeader&) const = default;
};

Bytes SerializeObjectHeader(const ObjectHeader& h);
ObjectHeader ParseObjectHeader(ByteView data);

// Maps AUs to groups (one per GOP) and objects (one fMP4 fragment per AU),
// each group on its own stream.
class Publisher {
 public:
  Publisher(smt::SmtConnection* conn, uint32_t track_id, std::string name, int gop_length,
            int fps);

  // Opens the control stream and sends ANNOUNCE.
  void Announce();
  void OnControlData(ByteView data);
  bool subscribed() const { return subscribed_; }

  // AUs must arrive in increasing seq order (kPrecondition otherwise).
  void PublishAu(const media::AccessUnit& au);
  // Closes the open group stream, if any.
  void Finish();

  int64_t groups_opened() const { return groups_opened_; }
  // Stream of the most recently opened group; 0 before the first.
  uint32_t last_stream_id() const { return open_stream_; }

 private:
  smt::SmtConnection* conn_;
  uint32_t track_id_;
  std::string name_;
  int gop_;
  int fps_;
  ControlReader control_;
  bool subscribed_ = false;
  std::optional<int64_t> last_seq_;
  std::optional<uint64_t> open_group_;
  uint32_t open_stream_ = 0;
  int64_t groups_opened_ = 0;
};

struct DeliveredObject {
  uint64_t group_id = 0;
  uint32_t object_id = 0;
  int64_t seq = 0;
  int64_t pts_90k = 0;
  bool keyframe = false;
  Bytes payload;            // AU payload extracted from the fragment
  int64_t first_arrival_us = 0;
};

struct StreamError {
  uint32_t stream_id;
  std::string message;
};

// Parses objects per stream and releases them in group order, abandoning a
// stalled group as soon as a later group's first object is complete.
class Subscriber {
 public:
  Subscriber(smt::SmtConnection* conn, uint32_t track_id, int gop_length);

  void OnControlData(ByteView data);
  bool announced() const { return announced_; }

  // Returns objects that became playable, in play order.
  std::vector<DeliveredObject> OnStreamData(uint32_t stream_id, ByteView data,
                                            int64_t now_us);
  std::vector<DeliveredObject> OnStreamFin(uint32_t stream_id);

  // Seqs abandoned by the skip policy.
  const std::set<int64_t>& skipped() const { return skipped_; }
  const std::vector<StreamError>& errors() const { return errors_; }

 private:
  struct Incoming {
    Bytes buffer;
    std::optional<uint64_t> group;
    std::optional<int64_t> object_start_us;
    bool failed = false;
  };
  struct Group {
    std::map<uint32_t, DeliveredObject> objects;
    uint32_t next_object = 0;
    bool fin = false;
  };

  void Release(std::vector<DeliveredObject>* out);
  void Abandon(uint64_t group_id);

  smt::SmtConnection* conn_;
  uint32_t track_id_;
  int gop_;
  ControlReader control_;
  bool announced_ = false;
  std::map<uint32_t, Incoming> streams_;
  std::map<uint64_t, Group> groups_;
  std::optional<uint64_t> current_;
  std::set<int64_t> skipped_;
  std::vector<StreamError> errors_;
};

}  // namespace rrsb::moq

#endif  // RRSB_MOQ_MOQ_H_
