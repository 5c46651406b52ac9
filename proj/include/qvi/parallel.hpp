#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace qvi {

/// Static-partition parallel loop over [0, total). The functor receives a
/// half-open index range plus its chunk id. Partitioning depends only on
/// (total, threads), never on scheduling, so any per-chunk reduction that is
/// order-insensitive (max, sum of disjoint writes) is reproducible.
template <typename Fn>
void parallel_for(std::size_t total, int threads, Fn&& fn) {
    if (threads <= 1 || total < 2 * static_cast<std::size_t>(threads)) {
        fn(std::size_t{0}, total, 0);
        return;
    }
    const std::size_t nchunk = static_cast<std::size_t>(threads);
    const std::size_t base = total / nchunk;
    const std::size_t rem = total % nchunk;
    std::vector<std::thread> workers;
    workers.reserve(nchunk - 1);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < nchunk; ++c) {
        const std::size_t len = base + (c < rem ? 1 : 0);
        const std::size_t end = begin + len;
        if (c + 1 == nchunk) {
            fn(begin, end, static_cast<int>(c));
        } else {
            workers.emplace_back([&fn, begin, end, c] { fn(begin, end, static_cast<int>(c)); });
        }
        begin = end;
    }
    for (auto& w : workers) w.join();
}

} // namespace qvi
