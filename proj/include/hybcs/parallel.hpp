#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hybcs {

// Worker-pool size from HYBCS_WORKERS (default 1).
inline int env_workers() {
    const char* v = std::getenv("HYBCS_WORKERS");
    if (!v || !*v) return 1;
    try {
        int n = std::stoi(v);
        return n > 0 ? n : 1;
    } catch (...) {
        return 1;
    }
}

// Runs fn(i) for i in [0, count) on a small pool; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, int workers, F&& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace hybcs
