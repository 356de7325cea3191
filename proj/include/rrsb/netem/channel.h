#ifndef RRSB_NETEM_CHANNEL_H_
#define RRSB_NETEM_CHANNEL_H_

#include <functional>
#include <memory>

#include "rrsb/netem/link.h"
#include "rrsb/sim/event_loop.h"
#include "rrsb/sim/realtime_loop.h"

namespace rrsb::netem {

// Arrival time is on the owning loop's timebase.
using ReceiveFn = std::function<void(Bytes data, int64_t arrival_us)>;

// One direction of datagram transport between two endpoints.
class DatagramChannel {
 public:
  virtual ~DatagramChannel() = default;
  virtual SendResult Send(Bytes datagram) = 0;
  virtual void SetReceiver(ReceiveFn receiver) = 0;
  virtual EmuLink& link() = 0;
};

// Emulated link whose deliveries are timers on an event loop.
class SimChannel : public DatagramChannel {
 public:
  SimChannel(sim::EventLoop* loop, NetProfile profile);
  ~SimChannel() override;

  SendResult Send(Bytes datagram) override;
  void SetReceiver(ReceiveFn receiver) override { receiver_ = std::move(receiver); }
  EmuLink& link() override { return link_; }

 private:
  void Rearm();
  void Deliver();

  sim::EventLoop* loop_;
  EmuLink link_;
  ReceiveFn receiver_;
  sim::TimerId timer_ = sim::kNoTimer;
  int64_t armed_at_ = 0;
};

// Emulated link whose surviving datagrams are sent over a loopback UDP
// socket at their delivery time and read back through the loop.
class UdpChannel : public DatagramChannel {
 public:
  // `loop` must outlive the channel. Raises kIo if sockets cannot be set up.
  UdpChannel(sim::RealtimeLoop* loop, NetProfile profile);
  ~UdpChannel() override;

  SendResult Send(Bytes datagram) override;
  void SetReceiver(ReceiveFn receiver) override { receiver_ = std::move(receiver); }
  EmuLink& link() override { return link_; }
  uint16_t port() const { return port_; }
  int64_t socket_errors() const { return socket_errors_; }

 private:
  void OnReadable();
  void Rearm();
  void Flush();

  sim::RealtimeLoop* loop_;
  EmuLink link_;
  ReceiveFn receiver_;
  int send_fd_ = -1;
  int recv_fd_ = -1;
  uint16_t port_ = 0;
  int64_t socket_errors_ = 0;
  sim::TimerId timer_ = sim::kNoTimer;
  int64_t armed_at_ = 0;
};

}  // namespace rrsb::netem

#endif  // RRSB_NETEM_CHANNEL_H_
