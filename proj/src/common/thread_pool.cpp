#include "ogb/common/thread_pool.hpp"

namespace ogb {

ThreadPool::ThreadPool(std::size_t threads)
{
  if (threads == 0)
    threads = 1;
  m_threads.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i)
    m_threads.emplace_back([this] { run(); });
}

ThreadPool::~ThreadPool()
{
  {
    std::lock_guard lock(m_mutex);
    m_stop = true;
  }
  m_cv.notify_all();
  for (auto& t : m_threads)
    t.join();
}

void
ThreadPool::post(std::function<void()> task)
{
  {
    std::lock_guard lock(m_mutex);
    m_tasks.push_back(std::move(task));
  }
  m_cv.notify_one();
}

void
ThreadPool::wait_idle()
{
  std::unique_lock lock(m_mutex);
  m_idle_cv.wait(lock, [this] { return m_tasks.empty() && m_running == 0; });
}

void
ThreadPool::run()
{
  std::unique_lock lock(m_mutex);
  while (true) {
    m_cv.wait(lock, [this] { return m_stop || !m_tasks.empty(); });
    if (m_tasks.empty())
      return;
    auto task = std::move(m_tasks.front());
    m_tasks.pop_front();
    ++m_running;
    lock.unlock();
    task();
    lock.lock();
    --m_running;
    if (m_tasks.empty() && m_running == 0)
      m_idle_cv.notify_all();
  }
}

} // namespace ogb
