#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace smpkit {

// Global worker count for path-parallel loops. 1 = serial.
void set_num_threads(int n);
int num_threads();

// Splits [begin, end) into a fixed number of chunks (independent of the
// worker count) and runs body(chunk_begin, chunk_end) on each. Results that
// must be reduced should be accumulated per chunk and combined in chunk
// order by the caller, so the outcome does not depend on scheduling.
inline void parallel_for_chunks(int begin, int end,
                                const std::function<void(int, int, int)>& body,
                                int chunks = 64) {
    chunks = std::max(1, std::min(chunks, end - begin));
    std::vector<std::pair<int, int>> ranges;
    ranges.reserve(chunks);
    const int len = end - begin;
    for (int c = 0; c < chunks; ++c) {
        int lo = begin + static_cast<int>(static_cast<long long>(len) * c / chunks);
        int hi = begin + static_cast<int>(static_cast<long long>(len) * (c + 1) / chunks);
        if (lo < hi) ranges.emplace_back(lo, hi);
    }
    const int workers = std::min<int>(num_threads(), static_cast<int>(ranges.size()));
    if (workers <= 1) {
        for (size_t c = 0; c < ranges.size(); ++c)
            body(ranges[c].first, ranges[c].second, static_cast<int>(c));
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (size_t c = w; c < ranges.size(); c += workers)
                body(ranges[c].first, ranges[c].second, static_cast<int>(c));
        });
    }
    for (auto& t : pool) t.join();
}

namespace detail {
inline int& thread_count() {
    static int n = 1;
    return n;
}
}  // namespace detail

inline void set_num_threads(int n) { detail::thread_count() = std::max(1, n); }
inline int num_threads() { return detail::thread_count(); }

}  // namespace smpkit
