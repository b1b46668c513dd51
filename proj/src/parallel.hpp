#pragma once
#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace cuspsim::detail {

// Static block partition; fn(i) must only touch slot i of any shared output.
template <typename Fn>
void parallel_for(std::size_t count, bool parallel, Fn&& fn) {
    const std::size_t workers =
        parallel ? std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count) : 1;
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
}

} // namespace cuspsim::detail
