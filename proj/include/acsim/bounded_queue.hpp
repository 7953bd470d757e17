#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <stop_token>
#include <vector>

namespace acsim {

// Multi-producer, single-consumer FIFO with a hard capacity. Producers never
// block: a push onto a full queue fails and the caller counts the drop.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  bool try_push(T value) {
    {
      std::lock_guard lock(mutex_);
      if (items_.size() >= capacity_) return false;
      items_.push_back(std::move(value));
    }
    ready_.notify_one();
    return true;
  }

  // Moves every queued item into `out` (appending) and returns how many.
  std::size_t drain(std::vector<T>& out) {
    std::lock_guard lock(mutex_);
    const std::size_t n = items_.size();
    for (auto& item : items_) out.push_back(std::move(item));
    items_.clear();
    return n;
  }

  // Blocks until an item is queued, the deadline passes or stop is requested.
  template <typename Clock, typename Duration>
  bool wait_until(std::stop_token stop, const std::chrono::time_point<Clock, Duration>& deadline) {
    std::unique_lock lock(mutex_);
    return ready_.wait_until(lock, stop, deadline, [&] { return !items_.empty(); });
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

  std::size_t capacity() const { return capacity_; }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable_any ready_;
  std::deque<T> items_;
};

}  // namespace acsim
