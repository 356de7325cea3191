#ifndef RRSB_SIM_REALTIME_LOOP_H_
#define RRSB_SIM_REALTIME_LOOP_H_

#include <functional>
#include <map>

#include "rrsb/sim/event_loop.h"

namespace rrsb::sim {

// Wall-clock loop: timers plus readable-fd callbacks, driven by poll(2).
// Now() is CLOCK_REALTIME in microseconds.
class RealtimeLoop : public EventLoop {
 public:
  int64_t Now() const override;

  void WatchFd(int fd, std::function<void()> on_readable);
  void UnwatchFd(int fd);

  // Runs until `done` holds or the wall clock passes `deadline_us`.
  bool RunUntil(const std::function<bool()>& done, int64_t deadline_us);

 private:
  std::map<int, std::function<void()>> fds_;
};

}  // namespace rrsb::sim

#endif  // RRSB_SIM_REALTIME_LOOP_H_
