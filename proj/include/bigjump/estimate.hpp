#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "errors.hpp"

namespace bigjump
{
//---------------------------------------------------------------------------//
/*!
 * Crude Monte Carlo estimate of a probability.
 *
 * The standard error is the binomial one and the 95% interval is the normal
 * interval clipped to [0, 1].
 */
struct MCEstimate
{
    double p_hat = 0;
    double std_error = 0;
    double ci_lo = 0;
    double ci_hi = 0;
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::uint64_t hits = 0;

    //! Fewer hits than this make the estimate unreliable.
    static constexpr std::uint64_t min_reliable_hits = 10;

    static MCEstimate from_hits(std::uint64_t hits,
                                std::uint64_t n_paths,
                                std::uint64_t seed)
    {
        if (n_paths == 0)
        {
            throw InvalidParameter("MCEstimate needs at least one path");
        }
        if (hits > n_paths)
        {
            throw InvalidParameter("MCEstimate hits exceed paths");
        }
        MCEstimate e;
        e.hits = hits;
        e.n_paths = n_paths;
        e.seed = seed;
        e.p_hat = static_cast<double>(hits) / static_cast<double>(n_paths);
        e.std_error = std::sqrt(e.p_hat * (1 - e.p_hat) / static_cast<double>(n_paths));
        e.ci_lo = std::max(0.0, e.p_hat - 1.96 * e.std_error);
        e.ci_hi = std::min(1.0, e.p_hat + 1.96 * e.std_error);
        return e;
    }

    bool low_hits() const { return hits < min_reliable_hits; }
};

}  // namespace bigjump
