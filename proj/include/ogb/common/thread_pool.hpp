#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ogb {

/// Fixed-size FIFO worker pool.
class ThreadPool
{
public:
  explicit ThreadPool(std::size_t threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  void
  post(std::function<void()> task);

  /// Blocks until the queue is empty and no task is running.
  void
  wait_idle();

  std::size_t size() const { return m_threads.size(); }

private:
  void
  run();

  std::mutex m_mutex;
  std::condition_variable m_cv;
  std::condition_variable m_idle_cv;
  std::deque<std::function<void()>> m_tasks;
  std::size_t m_running = 0;
  bool m_stop = false;
  std::vector<std::thread> m_threads;
};

} // namespace ogb
