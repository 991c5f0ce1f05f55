#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bigjump
{
//! Paths per scheduling chunk; chunk results are merged in index order.
inline constexpr std::uint64_t path_chunk = 4096;

inline unsigned default_workers()
{
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

//---------------------------------------------------------------------------//
/*!
 * Run \c body over [0, n) in fixed-size chunks and fold the chunk
 * accumulators in chunk order.
 *
 * \c body(first, last, acc) fills an accumulator for one chunk and
 * \c merge(total, acc) folds it. Because chunks are fixed and merged in
 * order, the result does not depend on the number of workers.
 */
template<class Acc, class Body, class Merge>
Acc parallel_paths(std::uint64_t n,
                   unsigned workers,
                   Acc init,
                   Body const& body,
                   Merge const& merge)
{
    std::uint64_t chunks = (n + path_chunk - 1) / path_chunk;
    std::vector<Acc> partial(chunks, init);
    auto run_chunk = [&](std::uint64_t c) {
        std::uint64_t first = c * path_chunk;
        std::uint64_t last = std::min(n, first + path_chunk);
        body(first, last, partial[c]);
    };
    workers = std::max(1u, std::min<unsigned>(
                               workers, static_cast<unsigned>(std::max<std::uint64_t>(chunks, 1))));
    if (workers == 1)
    {
        for (std::uint64_t c = 0; c < chunks; ++c)
        {
            run_chunk(c);
        }
    }
    else
    {
        std::mutex mtx;
        std::uint64_t next = 0;
        std::exception_ptr failure;
        auto worker = [&] {
            while (true)
            {
                std::uint64_t c;
                {
                    std::lock_guard lock(mtx);
                    if (next >= chunks || failure)
                    {
                        return;
                    }
                    c = next++;
                }
                try
                {
                    run_chunk(c);
                }
                catch (...)
                {
                    std::lock_guard lock(mtx);
                    failure = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i)
        {
            pool.emplace_back(worker);
        }
        for (auto& t : pool)
        {
            t.join();
        }
        if (failure)
        {
            std::rethrow_exception(failure);
        }
    }
    Acc total = init;
    for (auto const& p : partial)
    {
        merge(total, p);
    }
    return total;
}

}  // namespace bigjump
