#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lossprior {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(index, worker_id) for every index in [0, count) across `threads`
// workers. fn must write only to slots owned by its index, which makes the
// overall result independent of the worker count and scheduling. If several
// indices throw, the lowest index wins.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t, int)>& fn) {
    threads = resolve_threads(threads);
    if (count <= 0) return;
    if (threads == 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i, 0);
        return;
    }
    const std::int64_t chunk =
        std::max<std::int64_t>(1, count / (static_cast<std::int64_t>(threads) * 16));
    std::atomic<std::int64_t> next{0};
    std::mutex err_mu;
    std::int64_t err_index = -1;
    std::exception_ptr err;

    auto worker = [&](int wid) {
        for (;;) {
            const std::int64_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::int64_t end = std::min(begin + chunk, count);
            for (std::int64_t i = begin; i < end; ++i) {
                try {
                    fn(i, wid);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (err_index < 0 || i < err_index) {
                        err_index = i;
                        err = std::current_exception();
                    }
                    return;
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace lossprior
