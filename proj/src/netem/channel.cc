#include "rrsb/netem/channel.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "rrsb/common/error.h"

namespace rrsb::netem {

SimChannel::SimChannel(sim::EventLoop* loop, NetProfile profile)
    : loop_(loop), link_(std::move(profile)) {}

SimChannel::~SimChannel() { loop_->Cancel(timer_); }

SendResult SimChannel::Send(Bytes datagram) {
  SendResult r = link_.Send(std::move(datagram), loop_->Now());
  Rearm();
  return r;
}

void SimChannel::Rearm() {
  auto next = link_.NextDeliveryTime();
  if (timer_ != sim::kNoTimer && next && *next == armed_at_) return;
  loop_->Cancel(timer_);
  timer_ = sim::kNoTimer;
  if (!next) return;
  armed_at_ = *next;
  timer_ = loop_->PostAt(*next, [this] { Deliver(); });
}

void SimChannel::Deliver() {
  timer_ = sim::kNoTimer;
  for (auto& d : link_.Poll(loop_->Now())) {
    if (receiver_) receiver_(std::move(d.data), d.deliver_at_us);
  }
  Rearm();
}

UdpChannel::UdpChannel(sim::RealtimeLoop* loop, NetProfile profile)
    : loop_(loop), link_(std::move(profile)) {
  send_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  recv_fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (send_fd_ < 0 || recv_fd_ < 0) throw Error(ErrorCode::kIo, "socket() failed");
  int buf = 8 << 20;
  ::setsockopt(recv_fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof(buf));
  ::setsockopt(send_fd_, SOL_SOCKET, SO_SNDBUF, &buf, sizeof(buf));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(recv_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error(ErrorCode::kIo, "bind() failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(recv_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  ::fcntl(recv_fd_, F_SETFL, ::fcntl(recv_fd_, F_GETFL) | O_NONBLOCK);
  loop_->WatchFd(recv_fd_, [this] { OnReadable(); });
}

UdpChannel::~UdpChannel() {
  loop_->Cancel(timer_);
  loop_->UnwatchFd(recv_fd_);
  if (send_fd_ >= 0) ::close(send_fd_);
  if (recv_fd_ >= 0) ::close(recv_fd_);
}

SendResult UdpChannel::Send(Bytes datagram) {
  SendResult r = link_.Send(std::move(datagram), loop_->Now());
  Rearm();
  return r;
}

void UdpChannel::Rearm() {
  auto next = link_.NextDeliveryTime();
  if (timer_ != sim::kNoTimer && next && *next == armed_at_) return;
  loop_->Cancel(timer_);
  timer_ = sim::kNoTimer;
  if (!next) return;
  armed_at_ = *next;
  timer_ = loop_->PostAt(*next, [this] { Flush(); });
}

void UdpChannel::Flush() {
  timer_ = sim::kNoTimer;
  sockaddr_in to{};
  to.sin_family = AF_INET;
  to.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  to.sin_port = htons(port_);
  for (auto& d : link_.Poll(loop_->Now())) {
    const ssize_t n = ::sendto(send_fd_, d.data.data(), d.data.size(), 0,
                               reinterpret_cast<sockaddr*>(&to), sizeof(to));
    if (n != static_cast<ssize_t>(d.data.size())) ++socket_errors_;
  }
  Rearm();
}

void UdpChannel::OnReadable() {
  Bytes buf(kMaxDatagramSize);
  while (true) {
    const ssize_t n = ::recv(recv_fd_, buf.data(), buf.size(), 0);
    if (n < 0) return;
    if (receiver_) receiver_(Bytes(buf.begin(), buf.begin() + n), loop_->Now());
  }
}

}  // namespace rrsb::netem
