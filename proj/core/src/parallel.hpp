#ifndef COMBSEP_PARALLEL_HPP
#define COMBSEP_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace combsep::detail
{
// Runs body(begin, end) over contiguous chunks of [0, count). Chunk
// boundaries depend only on count and threads; callers write results into
// pre-sized slots so output never depends on scheduling.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned threads, Body &&body)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        body(std::size_t{0}, count);
        return;
    }
    const std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(count, begin + chunk);
            if (begin >= end)
                break;
            pool.emplace_back([&, w, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}
} // namespace combsep::detail

#endif // COMBSEP_PARALLEL_HPP
