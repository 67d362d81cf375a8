#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace stabvote {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

// Splits [0, total) into one contiguous range per worker: body(worker, begin,
// end). Callers must combine per-worker results with an order-independent
// reduction (integer counters) so the thread count cannot change the output.
template <typename F>
void parallel_ranges(std::uint64_t total, int threads, F&& body) {
    auto t64 = std::uint64_t(std::max(1, threads));
    t64 = std::min(t64, std::max<std::uint64_t>(total, 1));
    if (t64 == 1) {
        body(0, std::uint64_t(0), total);
        return;
    }
    std::vector<std::thread> ws;
    ws.reserve(std::size_t(t64));
    std::uint64_t chunk = total / t64, rem = total % t64, begin = 0;
    for (std::uint64_t t = 0; t < t64; ++t) {
        std::uint64_t len = chunk + (t < rem ? 1 : 0);
        ws.emplace_back([&body, t, begin, len] { body(int(t), begin, begin + len); });
        begin += len;
    }
    for (auto& w : ws) w.join();
}

} // namespace stabvote
