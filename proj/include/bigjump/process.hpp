#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "dist.hpp"
#include "errors.hpp"

namespace bigjump
{
enum class ProcessKind
{
    random_walk,
    compound_renewal,
    jump_diffusion
};

inline char const* to_string(ProcessKind k)
{
    switch (k)
    {
        case ProcessKind::random_walk: return "random_walk";
        case ProcessKind::compound_renewal: return "compound_renewal";
        case ProcessKind::jump_diffusion: return "jump_diffusion";
    }
    return "unknown";
}

//---------------------------------------------------------------------------//
/*!
 * Description of a process to simulate.
 *
 * - random walk: S_n = Y_1 + ... + Y_n, horizon measured in steps;
 * - compound renewal with linear drift: X_t = sum_{i <= N_t} Y_i + c t where
 *   N_t counts arrivals with i.i.d. interarrival times;
 * - jump diffusion: X_t = drift t + sigma W_t + compound Poisson(intensity,
 *   jump law). Only jumps of the compound Poisson part are recorded as
 *   "big jumps".
 */
struct ProcessSpec
{
    ProcessKind kind = ProcessKind::random_walk;
    Distribution jump_law = Distribution::deterministic(0);
    //! Renewal interarrival law (exponential for the jump-diffusion clock).
    std::optional<Distribution> interarrival;
    //! Linear drift c (renewal) or Brownian drift (jump diffusion).
    double drift = 0;
    double sigma = 0;

    static ProcessSpec random_walk(Distribution jump)
    {
        ProcessSpec s;
        s.kind = ProcessKind::random_walk;
        s.jump_law = std::move(jump);
        return s;
    }

    static ProcessSpec
    compound_renewal(Distribution jump, Distribution interarrival, double c)
    {
        if (interarrival.lower() < 0)
        {
            throw InvalidParameter("interarrival law must live on [0, inf)");
        }
        if (!interarrival.has_finite_mean() || !(interarrival.mean() > 0))
        {
            throw InvalidParameter(
                "interarrival law needs a finite positive mean");
        }
        if (!std::isfinite(c))
        {
            throw InvalidParameter("linear drift must be finite");
        }
        ProcessSpec s;
        s.kind = ProcessKind::compound_renewal;
        s.jump_law = std::move(jump);
        s.interarrival = std::move(interarrival);
        s.drift = c;
        return s;
    }

    static ProcessSpec compound_poisson(Distribution jump, double rate, double c)
    {
        return compound_renewal(
            std::move(jump), Distribution::exponential(rate), c);
    }

    //! Brownian motion with drift plus compound Poisson jumps at \c rate.
    static ProcessSpec jump_diffusion(double sigma,
                                      double brownian_drift,
                                      double rate,
                                      Distribution jump)
    {
        if (!(sigma >= 0) || !std::isfinite(sigma))
        {
            throw InvalidParameter("sigma must be a finite nonnegative number");
        }
        if (!(rate >= 0) || !std::isfinite(rate))
        {
            throw InvalidParameter("jump intensity must be >= 0");
        }
        if (!std::isfinite(brownian_drift))
        {
            throw InvalidParameter("brownian drift must be finite");
        }
        ProcessSpec s;
        s.kind = ProcessKind::jump_diffusion;
        s.jump_law = std::move(jump);
        if (rate > 0)
        {
            s.interarrival = Distribution::exponential(rate);
        }
        s.drift = brownian_drift;
        s.sigma = sigma;
        return s;
    }

    //! Jump intensity lambda = 1 / E tau (one per step for a random walk).
    double intensity() const
    {
        if (kind == ProcessKind::random_walk)
        {
            return 1;
        }
        return interarrival ? 1 / interarrival->mean() : 0.0;
    }

    /*!
     * Mean increment per jump: E Y for a random walk, c / lambda + E Y for a
     * renewal process and E X_1 / lambda for a jump diffusion.
     */
    double per_jump_drift() const
    {
        double lambda = intensity();
        if (kind == ProcessKind::random_walk)
        {
            return jump_law.mean();
        }
        return per_time_drift() / lambda;
    }

    /*!
     * Mean increment per unit time: a lambda for renewal processes and
     * E X_1 = drift + lambda E Y for a jump diffusion.
     */
    double per_time_drift() const
    {
        double lambda = intensity();
        if (kind == ProcessKind::random_walk)
        {
            return jump_law.mean();
        }
        if (lambda == 0)
        {
            return drift;
        }
        return drift + lambda * jump_law.mean();
    }

    std::string describe() const
    {
        std::string s = to_string(kind);
        s += "{jump=" + jump_law.describe();
        if (interarrival)
        {
            s += ", interarrival=" + interarrival->describe();
        }
        s += ", drift=" + std::to_string(drift);
        if (kind == ProcessKind::jump_diffusion)
        {
            s += ", sigma=" + std::to_string(sigma);
        }
        return s + "}";
    }
};

}  // namespace bigjump
