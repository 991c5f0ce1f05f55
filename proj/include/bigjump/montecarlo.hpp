#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "parallel.hpp"
#include "process.hpp"
#include "random.hpp"
#include "simulate.hpp"

namespace bigjump
{
enum class Statistic
{
    max,
    terminal
};

//---------------------------------------------------------------------------//
//! Exceedance estimates for a grid of levels, from one set of paths.
struct ExceedanceGrid
{
    std::vector<double> xs;
    double t = 0;
    std::vector<MCEstimate> max;
    std::vector<MCEstimate> terminal;
};

namespace detail
{
struct HitCounts
{
    std::vector<std::uint64_t> max;
    std::vector<std::uint64_t> terminal;

    void merge(HitCounts const& other)
    {
        for (std::size_t i = 0; i < max.size(); ++i)
        {
            max[i] += other.max[i];
            terminal[i] += other.terminal[i];
        }
    }
};

template<class PathFn>
ExceedanceGrid count_exceedances(std::vector<double> const& xs,
                                 double t,
                                 std::uint64_t n_paths,
                                 std::uint64_t seed,
                                 unsigned workers,
                                 PathFn const& path_fn)
{
    if (n_paths == 0)
    {
        throw InvalidParameter("Monte Carlo estimate needs n_paths >= 1");
    }
    HitCounts init{std::vector<std::uint64_t>(xs.size(), 0),
                   std::vector<std::uint64_t>(xs.size(), 0)};
    RandomStream base(seed);
    auto counts = parallel_paths(
        n_paths,
        workers,
        init,
        [&](std::uint64_t first, std::uint64_t last, HitCounts& acc) {
            PathResult path;
            for (std::uint64_t i = first; i < last; ++i)
            {
                auto rng = base.for_path(i);
                auto [terminal, max] = path_fn(rng, path);
                for (std::size_t j = 0; j < xs.size(); ++j)
                {
                    acc.max[j] += max > xs[j];
                    acc.terminal[j] += terminal > xs[j];
                }
            }
        },
        [](HitCounts& total, HitCounts const& c) { total.merge(c); });
    ExceedanceGrid grid;
    grid.xs = xs;
    grid.t = t;
    for (std::size_t j = 0; j < xs.size(); ++j)
    {
        grid.max.push_back(MCEstimate::from_hits(counts.max[j], n_paths, seed));
        grid.terminal.push_back(
            MCEstimate::from_hits(counts.terminal[j], n_paths, seed));
    }
    return grid;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Crude Monte Carlo estimates of P{M_t > x} and P{X_t > x} on a grid of x.
 *
 * Path i uses the substream (seed, i), so the estimates depend only on
 * (spec, t, xs, n_paths, seed).
 */
inline ExceedanceGrid estimate_exceedance_grid(ProcessSpec const& spec,
                                               double t,
                                               std::vector<double> const& xs,
                                               std::uint64_t n_paths,
                                               std::uint64_t seed,
                                               unsigned workers = default_workers())
{
    return detail::count_exceedances(
        xs, t, n_paths, seed, workers, [&](RandomStream& rng, PathResult& path) {
            simulate_path(spec, t, rng, path, false);
            return std::pair{path.terminal, path.max};
        });
}

inline MCEstimate estimate_exceedance(ProcessSpec const& spec,
                                      double t,
                                      double x,
                                      std::uint64_t n_paths,
                                      std::uint64_t seed,
                                      Statistic statistic,
                                      unsigned workers = default_workers())
{
    auto grid = estimate_exceedance_grid(spec, t, {x}, n_paths, seed, workers);
    return statistic == Statistic::max ? grid.max.front() : grid.terminal.front();
}

//! Exceedance estimates for the process stopped at an independent time tau.
inline ExceedanceGrid
estimate_stopped_exceedance_grid(ProcessSpec const& spec,
                                 Distribution const& tau,
                                 std::vector<double> const& xs,
                                 std::uint64_t n_paths,
                                 std::uint64_t seed,
                                 unsigned workers = default_workers())
{
    return detail::count_exceedances(
        xs,
        tau.mean(),
        n_paths,
        seed,
        workers,
        [&](RandomStream& rng, PathResult& path) {
            auto v = stopped_sample(spec, tau, rng, path);
            return std::pair{v.terminal, v.max};
        });
}

//---------------------------------------------------------------------------//
/*!
 * Parameters of the single-big-jump events
 *   D_k = {|X_s - r s| <= eps s + A for all s < T_k, Y_k > x + |r| T_k}
 * where r is the mean drift per unit time (a lambda for renewal processes).
 */
struct BigJumpParams
{
    double epsilon = 0.1;
    double A = 1;
    double drift_rate = -1;
    double lambda = 1;

    void validate() const
    {
        if (!(epsilon > 0) || !(A > 0))
        {
            throw InvalidParameter("big-jump band needs epsilon > 0 and A > 0");
        }
        if (!(lambda > 0))
        {
            throw InvalidParameter("big-jump events need a positive jump rate");
        }
    }

    //! |a| / (|a| + 2 eps / lambda) with a = drift_rate / lambda.
    double lower_bound() const
    {
        double abs_a = std::abs(drift_rate) / lambda;
        return abs_a / (abs_a + 2 * epsilon / lambda);
    }
};

struct BigJumpDetection
{
    bool occurred = false;
    //! 1-based index of the first qualifying jump.
    std::optional<std::size_t> k;
};

namespace detail
{
//! Band excess |X_s - r s| - eps s at one point of the skeleton.
inline double band_excess(double s, double level, double r, double eps)
{
    return std::abs(level - r * s) - eps * s;
}

/*!
 * Smallest A for which the band holds on one segment [s0, s1] that starts
 * at \c start, ends at \c end and peaks at \c peak. Linear segments peak
 * at an endpoint and are decided by their endpoints. An interior peak is
 * compared with the lowest point of the upper band edge on the segment,
 * which is conservative for Brownian segments.
 */
inline double segment_requirement(
    double s0, double start, double s1, double end, double peak, double r, double eps)
{
    double need = std::max(band_excess(s0, start, r, eps), band_excess(s1, end, r, eps));
    if (peak > std::max(start, end))
    {
        double s_low = (r + eps) < 0 ? s1 : s0;
        need = std::max(need, peak - (r + eps) * s_low);
    }
    return need;
}
}  // namespace detail

/*!
 * Check whether some D_k occurs on a recorded path.
 *
 * The band is checked on the path skeleton: jump epochs, pre-jump levels
 * and the recorded segment maxima.
 */
inline BigJumpDetection
detect_big_jump(PathResult const& path, double x, BigJumpParams const& params)
{
    params.validate();
    double const r = params.drift_rate;
    double const eps = params.epsilon;
    double s0 = 0;
    double start = 0;
    for (std::size_t k = 0; k < path.jumps.size(); ++k)
    {
        auto const& j = path.jumps[k];
        double need = detail::segment_requirement(
            s0, start, j.time, j.pre_level, j.segment_max, r, eps);
        if (need > params.A)
        {
            // The band is already broken for every later jump.
            return {};
        }
        if (j.size > x + std::abs(r) * j.time)
        {
            return {true, k + 1};
        }
        s0 = j.time;
        start = j.pre_level + j.size;
    }
    return {};
}

//! Smallest A for which the band holds on the whole path [0, horizon].
inline double
required_band(PathResult const& path, double epsilon, double drift_rate)
{
    double s0 = 0;
    double start = 0;
    double need = 0;
    for (auto const& j : path.jumps)
    {
        need = std::max(need,
                        detail::segment_requirement(
                            s0, start, j.time, j.pre_level, j.segment_max,
                            drift_rate, epsilon));
        s0 = j.time;
        start = j.pre_level + j.size;
    }
    need = std::max(need,
                    detail::segment_requirement(s0, start, path.horizon,
                                                path.terminal,
                                                path.final_segment_max,
                                                drift_rate, epsilon));
    return need;
}

//! Seed offset so calibration paths never coincide with experiment paths.
inline constexpr std::uint64_t calibration_seed_offset = 0x5DEECE66Dull;

/*!
 * Choose A as the \c quantile of the per-path band requirement over
 * [0, t], so that the band holds path-wide with that frequency.
 */
inline double calibrate_band(ProcessSpec const& spec,
                             double t,
                             double epsilon,
                             double drift_rate,
                             std::uint64_t n_paths,
                             std::uint64_t seed,
                             double quantile = 0.95)
{
    if (n_paths == 0)
    {
        throw InvalidParameter("calibrate_band needs n_paths >= 1");
    }
    RandomStream base(seed ^ calibration_seed_offset);
    std::vector<double> needs;
    needs.reserve(n_paths);
    PathResult path;
    for (std::uint64_t i = 0; i < n_paths; ++i)
    {
        auto rng = base.for_path(i);
        simulate_path(spec, t, rng, path, true);
        needs.push_back(required_band(path, epsilon, drift_rate));
    }
    auto idx = static_cast<std::size_t>(
        std::ceil(quantile * static_cast<double>(n_paths))) - 1;
    idx = std::min(idx, needs.size() - 1);
    std::nth_element(needs.begin(), needs.begin() + idx, needs.end());
    // A must be positive even when the band holds with no slack.
    return std::max(needs[idx], 1e-9);
}

//! Default parameters: epsilon = 0.1 |a| lambda, drift from the spec.
inline BigJumpParams default_big_jump_params(ProcessSpec const& spec)
{
    BigJumpParams p;
    p.lambda = spec.intensity();
    p.drift_rate = spec.per_time_drift();
    p.epsilon = 0.1 * std::abs(p.drift_rate);
    return p;
}

struct BigJumpEstimate
{
    //! P{union D_k | M_t > x}: hits are paths with some D_k among the
    //! n_paths paths that exceed x.
    MCEstimate conditional;
    //! P{M_t > x} from the same paths.
    MCEstimate exceedance;
    double lower_bound = 0;
    BigJumpParams params;
};

inline BigJumpEstimate conditional_big_jump_prob(ProcessSpec const& spec,
                                                 double t,
                                                 double x,
                                                 BigJumpParams const& params,
                                                 std::uint64_t n_paths,
                                                 std::uint64_t seed,
                                                 unsigned workers = default_workers())
{
    params.validate();
    detail::require_negative(spec.per_time_drift(), "mean drift");
    if (n_paths == 0)
    {
        throw InvalidParameter("conditional_big_jump_prob needs n_paths >= 1");
    }
    struct Acc
    {
        std::uint64_t exceed = 0;
        std::uint64_t big_jump = 0;
    };
    RandomStream base(seed);
    auto acc = parallel_paths(
        n_paths,
        workers,
        Acc{},
        [&](std::uint64_t first, std::uint64_t last, Acc& a) {
            PathResult path;
            for (std::uint64_t i = first; i < last; ++i)
            {
                auto rng = base.for_path(i);
                simulate_path(spec, t, rng, path, true);
                if (path.max > x)
                {
                    ++a.exceed;
                    a.big_jump += detect_big_jump(path, x, params).occurred;
                }
            }
        },
        [](Acc& total, Acc const& a) {
            total.exceed += a.exceed;
            total.big_jump += a.big_jump;
        });
    if (acc.exceed == 0)
    {
        throw InsufficientHits("conditional_big_jump_prob: no path exceeded x = "
                               + std::to_string(x));
    }
    BigJumpEstimate out;
    out.conditional = MCEstimate::from_hits(acc.big_jump, acc.exceed, seed);
    out.exceedance = MCEstimate::from_hits(acc.exceed, n_paths, seed);
    out.lower_bound = params.lower_bound();
    out.params = params;
    return out;
}

//---------------------------------------------------------------------------//
//! A Monte Carlo estimate tagged with the grid point it belongs to.
struct MCPoint
{
    double x = 0;
    double t = 0;
    MCEstimate estimate;
};

struct ComparisonRow
{
    double x = 0;
    double t = 0;
    std::string formula_id;
    double asym_value = 0;
    double p_hat = 0;
    double std_error = 0;
    double ratio = 0;
    double ratio_ci_lo = 0;
    double ratio_ci_hi = 0;
    unsigned flags = 0;
};

struct ComparisonTable
{
    std::vector<ComparisonRow> rows;
    //! Empty when no row is eligible for a verdict.
    std::optional<bool> verdict;
    std::size_t eligible = 0;
    std::size_t passing = 0;
    double band_lo = 0.75;
    double band_hi = 1.25;
};

inline constexpr unsigned verdict_excluding_flags
    = pre_asymptotic | out_of_scope | degenerate | low_hits;

inline bool same_point(double a, double b)
{
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

/*!
 * Compare Monte Carlo estimates with formula values point by point.
 *
 * A row is eligible for the verdict unless it carries a flag from
 * \c verdict_excluding_flags; it passes when its ratio interval meets
 * [band_lo, band_hi]. The verdict passes when at least \c pass_fraction of
 * the eligible rows pass.
 */
inline ComparisonTable compare_report(std::vector<AsymptoticEstimate> const& asym,
                                      std::vector<MCPoint> const& mc,
                                      double band_lo = 0.75,
                                      double band_hi = 1.25,
                                      double pass_fraction = 1.0)
{
    if (asym.size() != mc.size())
    {
        throw MisalignedGrids("compare_report: " + std::to_string(asym.size())
                              + " formula points vs " + std::to_string(mc.size())
                              + " Monte Carlo points");
    }
    ComparisonTable table;
    table.band_lo = band_lo;
    table.band_hi = band_hi;
    for (std::size_t i = 0; i < asym.size(); ++i)
    {
        auto const& a = asym[i];
        auto const& m = mc[i];
        if (!same_point(a.x, m.x) || !same_point(a.t, m.t))
        {
            throw MisalignedGrids("compare_report: point " + std::to_string(i)
                                  + " has mismatched (x, t)");
        }
        ComparisonRow row;
        row.x = a.x;
        row.t = a.t;
        row.formula_id = to_string(a.formula);
        row.asym_value = a.value;
        row.p_hat = m.estimate.p_hat;
        row.std_error = m.estimate.std_error;
        row.flags = a.flags;
        if (m.estimate.low_hits())
        {
            row.flags |= low_hits;
        }
        if (a.value > 0)
        {
            row.ratio = m.estimate.p_hat / a.value;
            row.ratio_ci_lo = m.estimate.ci_lo / a.value;
            row.ratio_ci_hi = m.estimate.ci_hi / a.value;
        }
        else
        {
            row.ratio = row.ratio_ci_lo = row.ratio_ci_hi
                = std::numeric_limits<double>::quiet_NaN();
            row.flags |= out_of_scope;
        }
        if (!(row.flags & verdict_excluding_flags))
        {
            ++table.eligible;
            if (row.ratio_ci_hi >= band_lo && row.ratio_ci_lo <= band_hi)
            {
                ++table.passing;
            }
        }
        table.rows.push_back(row);
    }
    if (table.eligible > 0)
    {
        table.verdict = static_cast<double>(table.passing)
                        >= pass_fraction * static_cast<double>(table.eligible);
    }
    return table;
}

}  // namespace bigjump
