#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace exittime::detail {

// Runs fn(0..n-1) on up to `threads` workers with a fixed strided schedule.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int j = 0; j < n; ++j) fn(j);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int j = w; j < n; j += threads) fn(j);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace exittime::detail
