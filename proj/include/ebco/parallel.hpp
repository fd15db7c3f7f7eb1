#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ebco {

// Chunked parallel loop over [0, count). Each index must write only to its
// own output slot; results are then independent of thread scheduling, which
// keeps seeded pipelines byte-reproducible.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = hw == 0 ? 1 : hw;
    if (workers <= 1 || count < 2 * workers) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = begin + chunk < count ? begin + chunk : count;
        if (begin >= end) break;
        threads.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace ebco
