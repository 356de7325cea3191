#include "rrsb/sim/realtime_loop.h"

#include <poll.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <vector>

#include "rrsb/common/error.h"

namespace rrsb::sim {

int64_t RealtimeLoop::Now() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void RealtimeLoop::WatchFd(int fd, std::function<void()> on_readable) {
  fds_[fd] = std::move(on_readable);
}

void RealtimeLoop::UnwatchFd(int fd) { fds_.erase(fd); }

bool RealtimeLoop::RunUntil(const std::function<bool()>& done, int64_t deadline_us) {
  std::vector<pollfd> pfds;
  while (!done()) {
    const int64_t now = Now();
    if (now >= deadline_us) return done();
    RunDue(now);
    if (done()) return true;
    int64_t wait_us = deadline_us - Now();
    if (auto next = NextTimerTime()) wait_us = std::min(wait_us, *next - Now());
    wait_us = std::max<int64_t>(wait_us, 0);
    pfds.clear();
    for (const auto& [fd, cb] : fds_) pfds.push_back(pollfd{fd, POLLIN, 0});
    // poll(2) has millisecond resolution; round up so timers are not early.
    const int timeout_ms = static_cast<int>(std::min<int64_t>((wait_us + 999) / 1000, 1000));
    const int rc = ::poll(pfds.data(), pfds.size(), timeout_ms);
    if (rc < 0 && errno != EINTR) throw Error(ErrorCode::kIo, "poll failed");
    for (const auto& p : pfds) {
      if (p.revents & (POLLIN | POLLERR | POLLHUP)) {
        auto it = fds_.find(p.fd);
        if (it == fds_.end()) continue;
        auto callback = it->second;  // the callback may unwatch its own fd
        callback();
      }
    }
  }
  return true;
}

}  // namespace rrsb::sim
