#include "rrsb/moq/moq.h"

#include "rrsb/common/error.h"
#include "rrsb/isobmff/mp4.h"

namespace rrsb::moq {

Bytes SerializeControl(const ControlMessage& m) {
  ByteWriter w;
  w.U8(static_cast<uint8_t>(m.type));
  w.U32(m.track_id);
  if (m.type == ControlType::kAnnounce) {
    if (m.name.size() > 255) throw Error(ErrorCode::kPrecondition, "track name > 255 bytes");
    w.U8(static_cast<uint8_t>(m.name.size()));
    w.Append(m.name);
  }
  return w.Take();
}

std::vector<ControlMessage> ControlReader::Feed(ByteView data) {
  buffer_.insert(buffer_.end(), data.begin(), data.end());
  std::vector<ControlMessage> out;
  std::size_t pos = 0;
  while (pos < buffer_.size()) {
    const uint8_t type = buffer_[pos];
    if (type != 1 && type != 2) {
      throw MalformedError("unknown control message " + std::to_string(type), pos);
    }
    std::size_t need = 5;
    if (type == 1) {
      if (buffer_.size() - pos < 6) break;
      need = 6 + buffer_[pos + 5];
    }
    if (buffer_.size() - pos < need) break;
    ControlMessage m;
    m.type = static_cast<ControlType>(type);
    m.track_id = ReadU32At(buffer_, pos + 1);
    if (type == 1) {
      m.name.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(pos + 6),
                    buffer_.begin() + static_cast<std::ptrdiff_t>(pos + need));
    }
    out.push_back(std::move(m));
    pos += need;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  return out;
}

Bytes SerializeObjectHeader(const ObjectHeader& h) {
  ByteWriter w;
  w.U32(h.track_id);
  w.U64(h.group_id);
  w.U32(h.object_id);
  w.U32(h.payload_len);
  return w.Take();
}

ObjectHeader ParseObjectHeader(ByteView data) {
  ByteReader r(data);
  ObjectHeader h;
  h.track_id = r.U32();
  h.group_id = r.U64();
  h.object_id = r.U32();
  h.payload_len = r.U32();
  return h;
}

Publisher::Publisher(smt::SmtConnection* conn, uint32_t track_id, std::string name,
                     int gop_length, int fps)
    : conn_(conn), track_id_(track_id), name_(std::move(name)), gop_(gop_length), fps_(fps) {
  if (gop_ < 1) throw Error(ErrorCode::kPrecondition, "gop length must be >= 1");
}

void Publisher::Announce() {
  const uint32_t id = conn_->OpenStream();
  if (id != kControlStreamId) throw Error(ErrorCode::kProtocol, "control stream must be 1");
  conn_->StreamSend(id, SerializeControl({ControlType::kAnnounce, track_id_, name_}));
}

void Publisher::OnControlData(ByteView data) {
  for (const auto& m : control_.Feed(data)) {
    if (m.type == ControlType::kSubscribe && m.track_id == track_id_) subscribed_ = true;
  }
}

void Publisher::PublishAu(const media::AccessUnit& au) {
  if (last_seq_ && au.seq <= *last_seq_) {
    throw Error(ErrorCode::kPrecondition, "AUs must be published in seq order");
  }
  last_seq_ = au.seq;
  const uint64_t group = static_cast<uint64_t>(au.seq / gop_);
  const uint32_t object = static_cast<uint32_t>(au.seq % gop_);
  if (open_group_ != group) {
    Finish();
    // A group joined mid-way cannot be decoded; wait for its keyframe.
    if (object != 0) return;
    open_stream_ = conn_->OpenStream();
    open_group_ = group;
    ++groups_opened_;
  }
  const media::AccessUnit* one = &au;
  isobmff::MediaFragment frag =
      isobmff::BuildFragment({one, 1}, static_cast<uint32_t>(au.seq + 1), fps_);
  Bytes object_bytes = SerializeObjectHeader(
      {track_id_, group, object, static_cast<uint32_t>(frag.bytes.size())});
  object_bytes.insert(object_bytes.end(), frag.bytes.begin(), frag.bytes.end());
  const bool last = object + 1 == static_cast<uint32_t>(gop_);
  conn_->StreamSend(open_stream_, object_bytes, last);
  if (last) open_group_.reset();
}

void Publisher::Finish() {
  if (!open_group_) return;
  conn_->StreamSend(open_stream_, {}, true);
  open_group_.reset();
}

Subscriber::Subscriber(smt::SmtConnection* conn, uint32_t track_id, int gop_length)
    : conn_(conn), track_id_(track_id), gop_(gop_length) {}

void Subscriber::OnControlData(ByteView data) {
  for (const auto& m : control_.Feed(data)) {
    if (m.type == ControlType::kAnnounce && m.track_id == track_id_ && !announced_) {
      announced_ = true;
      conn_->StreamSend(kControlStreamId, SerializeControl({ControlType::kSubscribe, track_id_, {}}));
    }
  }
}

std::vector<DeliveredObject> Subscriber::OnStreamData(uint32_t stream_id, ByteView data,
                                                      int64_t now_us) {
  std::vector<DeliveredObject> out;
  Incoming& in = streams_[stream_id];
  if (in.failed) return out;
  if (!in.object_start_us && !data.empty()) in.object_start_us = now_us;
  in.buffer.insert(in.buffer.end(), data.begin(), data.end());
  while (in.buffer.size() >= kObjectHeaderSize) {
    ObjectHeader h = ParseObjectHeader(in.buffer);
    if (h.track_id != track_id_ || (in.group && *in.group != h.group_id) ||
        h.object_id >= static_cast<uint32_t>(gop_)) {
      in.failed = true;
      errors_.push_back({stream_id, "bad object header"});
      return out;
    }
    if (in.buffer.size() < kObjectHeaderSize + h.payload_len) break;
    in.group = h.group_id;
    DeliveredObject obj;
    obj.group_id = h.group_id;
    obj.object_id = h.object_id;
    obj.first_arrival_us = *in.object_start_us;
    try {
      auto frag = isobmff::ParseFragment(
          ByteView(in.buffer).subspan(kObjectHeaderSize, h.payload_len));
      if (frag.payloads.size() != 1) throw MalformedError("object must hold one sample", 0);
      obj.pts_90k = frag.base_dts_90k;
      obj.keyframe = frag.keyframes[0];
      obj.payload = std::move(frag.payloads[0]);
    } catch (const Error& e) {
      in.failed = true;
      errors_.push_back({stream_id, e.what()});
      return out;
    }
    obj.seq = static_cast<int64_t>(h.group_id) * gop_ + h.object_id;
    in.buffer.erase(in.buffer.begin(),
                    in.buffer.begin() + static_cast<std::ptrdiff_t>(kObjectHeaderSize + h.payload_len));
    in.object_start_us.reset();
    if (!in.buffer.empty()) in.object_start_us = now_us;
    const bool stale = current_ && h.group_id < *current_;
    if (stale) {
      skipped_.insert(obj.seq);
    } else {
      Group& g = groups_[h.group_id];
      g.objects.emplace(h.object_id, std::move(obj));
    }
  }
  Release(&out);
  return out;
}

std::vector<DeliveredObject> Subscriber::OnStreamFin(uint32_t stream_id) {
  std::vector<DeliveredObject> out;
  auto it = streams_.find(stream_id);
  if (it == streams_.end() || !it->second.group) return out;
  auto g = groups_.find(*it->second.group);
  if (g == groups_.end()) return out;
  g->second.fin = true;
  Release(&out);
  return out;
}

void Subscriber::Abandon(uint64_t group_id) {
  auto it = groups_.find(group_id);
  uint32_t played = 0;
  if (it != groups_.end()) {
    played = it->second.next_object;
    groups_.erase(it);
  }
  for (uint32_t o = played; o < static_cast<uint32_t>(gop_); ++o) {
    skipped_.insert(static_cast<int64_t>(group_id) * gop_ + o);
  }
}

void Subscriber::Release(std::vector<DeliveredObject>* out) {
  while (true) {
    if (!current_) {
      // Start at the first group whose keyframe object is complete.
      for (auto& [id, g] : groups_) {
        if (g.objects.count(0)) {
          current_ = id;
          break;
        }
      }
      if (!current_) return;
      for (auto it = groups_.begin(); it != groups_.end() && it->first < *current_;) {
        const uint64_t id = it->first;
        ++it;
        Abandon(id);
      }
    }
    Group& g = groups_[*current_];
    while (g.objects.count(g.next_object)) {
      auto node = g.objects.extract(g.next_object);
      out->push_back(std::move(node.mapped()));
      ++g.next_object;
    }
    const bool complete = g.next_object == static_cast<uint32_t>(gop_) ||
                          (g.fin && g.objects.empty());
    if (complete) {
      groups_.erase(*current_);
      ++*current_;
      continue;
    }
    // Skip to the newest later group whose first object is complete.
    std::optional<uint64_t> target;
    for (auto& [id, later] : groups_) {
      if (id > *current_ && later.objects.count(0)) target = id;
      if (target) break;
    }
    if (!target) return;
    for (uint64_t id = *current_; id < *target; ++id) Abandon(id);
    current_ = *target;
  }
}

}  // namespace rrsb::moq
