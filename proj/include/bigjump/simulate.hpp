#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "process.hpp"
#include "random.hpp"

namespace bigjump
{
//---------------------------------------------------------------------------//
/*!
 * One jump of a simulated path together with the path skeleton needed to
 * check the drift band of the single-big-jump events.
 */
struct JumpRecord
{
    double time = 0;
    double size = 0;
    //! X(T_k-), the level just before the jump.
    double pre_level = 0;
    //! Maximum of the continuous segment ending at T_k (before the jump).
    double segment_max = 0;
};

struct PathResult
{
    double max = 0;
    double terminal = 0;
    double horizon = 0;
    std::uint64_t n_jumps = 0;
    std::vector<JumpRecord> jumps;
    //! Maximum of the final segment from the last jump to the horizon.
    double final_segment_max = 0;

    void reset(double t, bool record)
    {
        max = 0;
        terminal = 0;
        horizon = t;
        n_jumps = 0;
        final_segment_max = 0;
        if (record)
        {
            jumps.clear();
        }
    }
};

//---------------------------------------------------------------------------//
struct WalkMax
{
    double max = 0;
    double sum = 0;
};

//! Maximum over k in {0..n} of the partial sums of n draws of \c jump.
inline WalkMax rw_max(Distribution const& jump, std::uint64_t n, RandomStream& rng)
{
    WalkMax r;
    for (std::uint64_t k = 0; k < n; ++k)
    {
        r.sum += jump.sample(rng);
        r.max = std::max(r.max, r.sum);
    }
    return r;
}

//---------------------------------------------------------------------------//
/*!
 * Simulate a compound renewal process with linear drift on [0, t].
 *
 * Draws are consumed in the order tau_1, Y_1, tau_2, Y_2, ... so a longer
 * horizon on the same stream extends the same path. A jump landing exactly
 * at t is included. For c <= 0 the maximum is attained at 0 or at a jump
 * epoch; for c > 0 the candidates are the pre-jump peaks and X_t.
 */
inline void renewal_path_max(ProcessSpec const& spec,
                             double t,
                             RandomStream& rng,
                             PathResult& out,
                             bool record = false)
{
    if (spec.kind != ProcessKind::compound_renewal || !spec.interarrival)
    {
        throw InvalidParameter("renewal_path_max needs a compound renewal spec");
    }
    out.reset(t, record);
    double const c = spec.drift;
    Distribution const& tau = *spec.interarrival;
    double time = 0;
    double x = 0;
    double m = 0;
    while (true)
    {
        double dt = tau.sample(rng);
        if (time + dt > t)
        {
            double end = x + c * (t - time);
            out.final_segment_max = std::max(x, end);
            x = end;
            m = std::max(m, x);
            break;
        }
        time += dt;
        double pre = x + c * dt;
        double y = spec.jump_law.sample(rng);
        if (record)
        {
            out.jumps.push_back({time, y, pre, std::max(x, pre)});
        }
        m = std::max(m, pre);
        x = pre + y;
        m = std::max(m, x);
        ++out.n_jumps;
    }
    out.max = m;
    out.terminal = x;
}

inline PathResult
renewal_path_max(ProcessSpec const& spec, double t, RandomStream& rng)
{
    PathResult r;
    renewal_path_max(spec, t, rng, r, true);
    return r;
}

//---------------------------------------------------------------------------//
/*!
 * Sample the maximum of a Brownian segment of length h with volatility
 * sigma conditioned on its endpoints.
 *
 * Given both endpoints the drift drops out and the maximum of the bridge is
 * (s + e + sqrt((e - s)^2 - 2 sigma^2 h log U)) / 2 with U uniform on (0, 1).
 */
inline double brownian_segment_max(double start,
                                   double drift,
                                   double sigma,
                                   double h,
                                   double end,
                                   RandomStream& rng)
{
    (void)drift;
    if (sigma == 0)
    {
        return std::max(start, end);
    }
    if (!(h > 0))
    {
        throw InvalidParameter("brownian_segment_max needs h > 0");
    }
    double u = rng.uniform();
    double d = end - start;
    return 0.5 * (start + end + std::sqrt(d * d - 2 * sigma * sigma * h * std::log(u)));
}

//---------------------------------------------------------------------------//
/*!
 * Simulate a jump diffusion on [0, t] with exact maxima.
 *
 * Between jumps the Brownian endpoint is drawn from its Gaussian law and the
 * segment maximum from the bridge-maximum law, so the running maximum carries
 * no discretization bias.
 */
inline void levy_path_max(ProcessSpec const& spec,
                          double t,
                          RandomStream& rng,
                          PathResult& out,
                          bool record = false)
{
    if (spec.kind != ProcessKind::jump_diffusion)
    {
        throw InvalidParameter("levy_path_max needs a jump-diffusion spec");
    }
    out.reset(t, record);
    double const rate = spec.intensity();
    double const mu = spec.drift;
    double const sigma = spec.sigma;
    double time = 0;
    double x = 0;
    double m = 0;
    while (true)
    {
        double dt = rate > 0 ? rng.exponential() / rate : infinity;
        bool last = time + dt > t;
        double h = last ? t - time : dt;
        double seg_max = x;
        if (h > 0)
        {
            double end = x + mu * h + sigma * std::sqrt(h) * rng.normal();
            seg_max = brownian_segment_max(x, mu, sigma, h, end, rng);
            x = end;
        }
        m = std::max(m, seg_max);
        if (last)
        {
            out.final_segment_max = seg_max;
            break;
        }
        time += dt;
        double y = spec.jump_law.sample(rng);
        if (record)
        {
            out.jumps.push_back({time, y, x, seg_max});
        }
        x += y;
        m = std::max(m, x);
        ++out.n_jumps;
    }
    out.max = m;
    out.terminal = x;
}

inline PathResult levy_path_max(ProcessSpec const& spec, double t, RandomStream& rng)
{
    PathResult r;
    levy_path_max(spec, t, rng, r, true);
    return r;
}

//---------------------------------------------------------------------------//
/*!
 * Simulate any supported process to horizon t. For a random walk the
 * horizon is a number of steps and is truncated to an integer.
 */
inline void simulate_path(ProcessSpec const& spec,
                          double t,
                          RandomStream& rng,
                          PathResult& out,
                          bool record = false)
{
    switch (spec.kind)
    {
        case ProcessKind::random_walk:
        {
            out.reset(t, record);
            auto n = static_cast<std::uint64_t>(std::floor(t));
            double s = 0;
            double m = 0;
            for (std::uint64_t k = 1; k <= n; ++k)
            {
                double y = spec.jump_law.sample(rng);
                if (record)
                {
                    out.jumps.push_back({double(k), y, s, s});
                }
                s += y;
                m = std::max(m, s);
            }
            out.n_jumps = n;
            out.max = m;
            out.terminal = s;
            out.final_segment_max = s;
            return;
        }
        case ProcessKind::compound_renewal:
            renewal_path_max(spec, t, rng, out, record);
            return;
        case ProcessKind::jump_diffusion:
            levy_path_max(spec, t, rng, out, record);
            return;
    }
}

//---------------------------------------------------------------------------//
struct StoppedValue
{
    double terminal = 0;
    double max = 0;
    double tau = 0;
};

//! Stream tag reserved for the random horizon of a stopped path.
inline constexpr std::uint32_t stopping_time_tag = 0x51u;

/*!
 * Draw tau from its own substream, then simulate the path to horizon tau.
 */
inline StoppedValue stopped_sample(ProcessSpec const& spec,
                                   Distribution const& tau_law,
                                   RandomStream& rng,
                                   PathResult& scratch)
{
    auto tau_rng = rng.substream(stopping_time_tag);
    double tau = tau_law.sample(tau_rng);
    if (tau < 0)
    {
        throw InvalidParameter("stopping time must be nonnegative");
    }
    simulate_path(spec, tau, rng, scratch, false);
    return {scratch.terminal, scratch.max, tau};
}

inline StoppedValue
stopped_sample(ProcessSpec const& spec, Distribution const& tau_law, RandomStream& rng)
{
    PathResult scratch;
    return stopped_sample(spec, tau_law, rng, scratch);
}

//---------------------------------------------------------------------------//
//! Sample mean with its standard error; \c exact marks closed-form values.
struct MeanEstimate
{
    double value = 0;
    double std_error = 0;
    std::uint64_t n_paths = 0;
    std::uint64_t seed = 0;
    bool exact = false;
};

//! E N_t in closed form for Poisson and deterministic clocks.
inline std::optional<double>
exact_expected_jump_count(Distribution const& interarrival, double t)
{
    if (t <= 0)
    {
        return 0.0;
    }
    if (interarrival.is_positive_part() || interarrival.shift() != 0)
    {
        return std::nullopt;
    }
    if (interarrival.family() == Family::exponential)
    {
        return interarrival.param1() * t;
    }
    if (interarrival.family() == Family::deterministic)
    {
        return std::floor(t / interarrival.param1());
    }
    return std::nullopt;
}

/*!
 * E N_t for the spec's clock: exact for exponential and deterministic
 * interarrivals, otherwise a Monte Carlo mean over \c n_paths clocks.
 */
inline MeanEstimate expected_jump_count(ProcessSpec const& spec,
                                        double t,
                                        std::uint64_t n_paths,
                                        std::uint64_t seed,
                                        unsigned workers = default_workers())
{
    if (spec.kind == ProcessKind::random_walk)
    {
        return {std::floor(std::max(t, 0.0)), 0, 0, seed, true};
    }
    if (!spec.interarrival)
    {
        return {0, 0, 0, seed, true};
    }
    if (auto exact = exact_expected_jump_count(*spec.interarrival, t))
    {
        return {*exact, 0, 0, seed, true};
    }
    if (n_paths == 0)
    {
        throw InvalidParameter("expected_jump_count needs n_paths >= 1");
    }
    struct Acc
    {
        double sum = 0;
        double sum_sq = 0;
    };
    RandomStream base(seed);
    Distribution const& tau = *spec.interarrival;
    auto acc = parallel_paths(
        n_paths,
        workers,
        Acc{},
        [&](std::uint64_t first, std::uint64_t last, Acc& a) {
            for (std::uint64_t i = first; i < last; ++i)
            {
                auto rng = base.for_path(i);
                double time = 0;
                double count = 0;
                while (true)
                {
                    time += tau.sample(rng);
                    if (time > t)
                    {
                        break;
                    }
                    ++count;
                }
                a.sum += count;
                a.sum_sq += count * count;
            }
        },
        [](Acc& total, Acc const& a) {
            total.sum += a.sum;
            total.sum_sq += a.sum_sq;
        });
    double n = static_cast<double>(n_paths);
    double mean = acc.sum / n;
    double var = n > 1 ? (acc.sum_sq - n * mean * mean) / (n - 1) : 0.0;
    return {mean, std::sqrt(std::max(var, 0.0) / n), n_paths, seed, false};
}

}  // namespace bigjump
