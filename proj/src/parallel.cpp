#include "pollwait/parallel.hpp"

#include <atomic>

namespace pollwait {

std::vector<ChunkRange> make_chunks(size_t n, size_t n_chunks) {
    std::vector<ChunkRange> chunks;
    if (n == 0) return chunks;
    n_chunks = std::min(n_chunks, n);
    size_t base = n / n_chunks, rem = n % n_chunks;
    size_t begin = 0;
    for (size_t i = 0; i < n_chunks; ++i) {
        size_t len = base + (i < rem ? 1 : 0);
        chunks.push_back({i, begin, begin + len});
        begin += len;
    }
    return chunks;
}

void parallel_chunks(size_t n, int threads, const std::function<void(const ChunkRange&)>& fn,
                     size_t n_chunks) {
    auto chunks = make_chunks(n, n_chunks);
    if (chunks.empty()) return;
    threads = resolve_threads(threads);
    if (threads <= 1 || chunks.size() == 1) {
        for (const auto& c : chunks) fn(c);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= chunks.size()) break;
            fn(chunks[i]);
        }
    };
    std::vector<std::thread> pool;
    size_t nw = std::min<size_t>(size_t(threads), chunks.size());
    pool.reserve(nw);
    for (size_t i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace pollwait
