#pragma once

// Deterministic data-parallel map: fixed-size chunks, disjoint writes, so
// results are bitwise independent of the thread count. Reductions stay
// serial in index order elsewhere.

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace vprad {

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    constexpr std::size_t kChunk = 2048;
    if (threads <= 1 || n <= kChunk) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t begin = next.fetch_add(kChunk);
            if (begin >= n) return;
            std::size_t end = begin + kChunk < n ? begin + kChunk : n;
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
}

}  // namespace vprad
