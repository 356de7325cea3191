#include "rrsb/sim/event_loop.h"

namespace rrsb::sim {

TimerId EventLoop::PostAt(int64_t at_us, std::function<void()> task) {
  const TimerId id = next_id_++;
  timers_.emplace(Key{at_us, id}, std::move(task));
  index_.emplace(id, at_us);
  return id;
}

void EventLoop::Cancel(TimerId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return;
  timers_.erase(Key{it->second, id});
  index_.erase(it);
}

std::optional<int64_t> EventLoop::NextTimerTime() const {
  if (timers_.empty()) return std::nullopt;
  return timers_.begin()->first.first;
}

bool EventLoop::RunEarliest(int64_t* ran_at) {
  if (timers_.empty()) return false;
  auto it = timers_.begin();
  *ran_at = it->first.first;
  auto task = std::move(it->second);
  index_.erase(it->first.second);
  timers_.erase(it);
  task();
  return true;
}

void EventLoop::RunDue(int64_t now) {
  while (!timers_.empty() && timers_.begin()->first.first <= now) {
    int64_t ignored;
    RunEarliest(&ignored);
  }
}

void VirtualScheduler::RunUntil(int64_t until_us) {
  while (auto next = NextTimerTime()) {
    if (*next > until_us) break;
    if (*next > now_) now_ = *next;
    int64_t at;
    RunEarliest(&at);
  }
  if (until_us > now_) now_ = until_us;
}

bool VirtualScheduler::RunUntil(const std::function<bool()>& done, int64_t deadline_us) {
  if (done()) return true;
  while (auto next = NextTimerTime()) {
    if (*next > deadline_us) break;
    if (*next > now_) now_ = *next;
    int64_t at;
    RunEarliest(&at);
    if (done()) return true;
  }
  return done();
}

}  // namespace rrsb::sim
