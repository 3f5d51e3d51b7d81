#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

namespace reflang {

template <class Result>
std::vector<Result> parallel_map(std::size_t n, std::size_t threads,
                                 const std::function<Result(std::size_t)>& f) {
  std::vector<Result> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));

  std::mutex guard;
  std::size_t failed_index = n;
  std::string failed_what;

  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = f(i);
      } catch (const std::exception& e) {
        std::lock_guard lock(guard);
        if (i < failed_index) {
          failed_index = i;
          failed_what = e.what();
        }
        return;
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  if (failed_index < n) throw PathError(failed_index, failed_what);
  return out;
}

}  // namespace reflang
