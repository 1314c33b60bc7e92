#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace grpx {

// Worker cap used by every ensemble loop. 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs f(i) for i in [0, n). Work is split into contiguous blocks and results are
// expected to be written by index, so output never depends on the worker count.
template <class F>
void parallel_for(int n, F&& f) {
    const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(std::max(n, 0)));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    const int block = (n + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(w) * block, hi = std::min(n, lo + block);
        pool.emplace_back([&, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(m);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace grpx
