#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pollwait {

// Deterministic chunked parallel map: [0,n) is split into a fixed number of
// chunks independent of the thread count, so any ordered per-chunk reduction
// yields identical results for 1 or N threads.
struct ChunkRange {
    size_t index;
    size_t begin;
    size_t end;
};

std::vector<ChunkRange> make_chunks(size_t n, size_t n_chunks = 64);

// Runs fn over each chunk; chunk outputs must be written to per-chunk slots.
void parallel_chunks(size_t n, int threads, const std::function<void(const ChunkRange&)>& fn,
                     size_t n_chunks = 64);

inline int resolve_threads(int threads_cfg) {
    if (threads_cfg > 0) return threads_cfg;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

} // namespace pollwait
