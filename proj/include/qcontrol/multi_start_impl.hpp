#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>

namespace qcontrol {

template <class R>
MultiStartResult<R> multi_start(const std::function<R(std::size_t, std::uint64_t)>& run,
                                const std::function<double(const R&)>& energy, int n_starts, std::uint64_t seed,
                                int workers) {
  if (n_starts < 1) throw std::invalid_argument("multi_start needs n_starts >= 1");
  const auto n = static_cast<std::size_t>(n_starts);
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        slots[i].emplace(run(i, start_seed(seed, i)));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(workers, 1, n_starts);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  MultiStartResult<R> out;
  out.runs.reserve(n);
  for (auto& s : slots) out.runs.push_back(std::move(*s));
  for (std::size_t i = 1; i < n; ++i) {
    if (energy(out.runs[i]) < energy(out.runs[out.best_index])) out.best_index = i;
  }
  return out;
}

}  // namespace qcontrol
