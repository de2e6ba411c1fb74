#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mvsim {

/// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per
/// worker. Results must not depend on the split; callers write disjoint
/// outputs and reduce afterwards in a fixed order.
template <class Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t w = 1; w < workers; ++w) {
            const std::size_t b = std::min(count, w * chunk);
            const std::size_t e = std::min(count, b + chunk);
            pool.emplace_back([&, w, b, e] {
                try {
                    fn(b, e);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        try {
            fn(std::size_t{0}, std::min(count, chunk));
        } catch (...) {
            errors[0] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace mvsim
