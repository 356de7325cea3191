#ifndef RRSB_SIM_EVENT_LOOP_H_
#define RRSB_SIM_EVENT_LOOP_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>

namespace rrsb::sim {

using TimerId = uint64_t;
inline constexpr TimerId kNoTimer = 0;

// Timer-driven loop shared by virtual-time and wall-clock runs. Times are
// microseconds on the loop's own timebase.
class EventLoop {
 public:
  virtual ~EventLoop() = default;

  virtual int64_t Now() const = 0;
  // Tasks posted for the past run as soon as possible. Tasks due at the same
  // time run in posting order.
  TimerId PostAt(int64_t at_us, std::function<void()> task);
  TimerId PostAfter(int64_t delay_us, std::function<void()> task) {
    return PostAt(Now() + delay_us, std::move(task));
  }
  void Cancel(TimerId id);
  std::size_t pending() const { return timers_.size(); }

 protected:
  std::optional<int64_t> NextTimerTime() const;
  // Runs every task due at or before `now`, including ones they post.
  void RunDue(int64_t now);
  // Pops and runs the earliest task; returns false when none remain.
  bool RunEarliest(int64_t* ran_at);

 private:
  using Key = std::pair<int64_t, TimerId>;
  std::map<Key, std::function<void()>> timers_;
  std::unordered_map<TimerId, int64_t> index_;
  TimerId next_id_ = 1;
};

// Single-threaded discrete-event scheduler. Time jumps to the next task.
class VirtualScheduler : public EventLoop {
 public:
  explicit VirtualScheduler(int64_t start_us = 0) : now_(start_us) {}

  int64_t Now() const override { return now_; }

  // Runs tasks due up to `until_us`, then sets the clock to `until_us`.
  void RunUntil(int64_t until_us);
  // Runs until `done` holds (checked after each task), the queue drains, or
  // the clock would pass `deadline_us`. Returns the final value of `done`.
  bool RunUntil(const std::function<bool()>& done, int64_t deadline_us);

 private:
  int64_t now_;
};

// Clock of one endpoint: the loop's time plus a fixed offset, modelling a
// host whose wall clock disagrees with its peer's.
class LocalClock {
 public:
  LocalClock(const EventLoop* loop, int64_t offset_us) : loop_(loop), offset_(offset_us) {}
  int64_t Now() const { return loop_->Now() + offset_; }
  int64_t offset() const { return offset_; }

 private:
  const EventLoop* loop_;
  int64_t offset_;
};

}  // namespace rrsb::sim

#endif  // RRSB_SIM_EVENT_LOOP_H_
