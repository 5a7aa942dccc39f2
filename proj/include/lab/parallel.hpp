#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lab {

void set_threads(unsigned n);
unsigned threads();

// Static contiguous chunking; f(i) must only write to slot i.
template <class F>
void parallel_for(std::size_t count, F&& f) {
    const unsigned nt = std::min<std::size_t>(threads(), count == 0 ? 1 : count);
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    const std::size_t chunk = (count + nt - 1) / nt;
    for (unsigned w = 0; w < nt; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard lk(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace lab
