#pragma once

// Parallel loops over indices. Every index writes its own slot and
// reductions run in a fixed order, so results are bit-identical for any
// worker cap.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace csphere {

inline std::atomic<int>& thread_cap_storage() {
    static std::atomic<int> cap{0};
    return cap;
}

// 0 means hardware concurrency.
inline void set_max_threads(int n) { thread_cap_storage().store(std::max(0, n)); }

inline int max_threads() {
    const int cap = thread_cap_storage().load();
    if (cap > 0) return cap;
    return std::max(1u, std::thread::hardware_concurrency());
}

inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

// Calls fn(i) for i in [0, n). fn must only write state owned by index i.
// Nested calls run serially on the calling worker.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (workers <= 1 || in_parallel_region()) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        const bool outer = in_parallel_region();
        in_parallel_region() = true;
        for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        in_parallel_region() = outer;
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

// Pairwise (tree) sum; the association order depends only on the length.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = x[0];
        for (std::size_t i = 1; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) { return pairwise_sum(v.data(), v.size()); }

} // namespace csphere
