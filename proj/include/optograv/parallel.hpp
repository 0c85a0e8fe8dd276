#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace optograv {

inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// f(i) for i in [0, n) on up to `jobs` threads, results in input order
template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned t = unsigned(std::min<std::size_t>(jobs, n));
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace optograv
