#pragma once

// Static-partition parallel map. Item i always lands in slot i, so results do
// not depend on the thread count or scheduling.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace becmet {

template <class In, class Fn>
auto parallel_map(const std::vector<In>& items, unsigned threads, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
  using Out = decltype(fn(items.front()));
  std::vector<Out> out(items.size());
  if (items.empty()) return out;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = fn(items[i]);
    return out;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < items.size(); i += threads) {
        try {
          out[i] = fn(items[i]);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace becmet
