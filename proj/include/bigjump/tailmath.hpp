#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace bigjump
{
//! Tail mass below which unbounded supports are truncated.
inline constexpr double truncation_tail = 1e-14;

//---------------------------------------------------------------------------//
/*!
 * Integral of the tail of \c d over [x, x + length].
 *
 * Closed forms are used where the family has one, adaptive quadrature
 * otherwise. An infinite \c length requires a finite mean.
 */
inline Quadrature tail_integral(Distribution const& d, double x, double length)
{
    if (length < 0 || std::isnan(length))
    {
        throw InvalidParameter("tail_integral window length must be >= 0");
    }
    if (length == 0)
    {
        return {};
    }
    auto q = d.window_integral(x, length);
    if (std::isinf(q.value))
    {
        throw InfiniteIntegral("tail integral over an infinite window diverges "
                               "for "
                               + d.describe());
    }
    return q;
}

namespace detail
{
//---------------------------------------------------------------------------//
/*!
 * E[g(Y); lo <= Y <= hi] for Y ~ d, including an atom at the lower end of
 * the support.
 *
 * The continuous part is integrated against the density on pieces of
 * geometrically growing width, so polynomial tails cost a number of pieces
 * logarithmic in the range. A piece whose left end has an unbounded density
 * is integrated in tail space, v = P{Y > y}, instead. The pieces are also
 * split at \c breaks so kinks of \c g sit on piece boundaries.
 */
template<class G>
Quadrature expect(Distribution const& d,
                  G const& g,
                  double lo,
                  double hi,
                  std::vector<double> breaks = {})
{
    Quadrature result;
    double support_lo = d.lower();
    if (d.atom() > 0 && support_lo >= lo && support_lo <= hi)
    {
        result.value += d.atom() * g(support_lo);
    }
    if (d.is_deterministic())
    {
        return result;
    }
    lo = std::max(lo, support_lo);
    if (!(hi > lo))
    {
        return result;
    }
    for (double w = 1; lo + w < hi; w *= 2)
    {
        breaks.push_back(lo + w);
    }
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    {
        double a = breaks[i];
        double b = breaks[i + 1];
        if (a < lo || b > hi || !(b > a))
        {
            continue;
        }
        if (std::isfinite(d.density(a)))
        {
            result += integrate([&](double y) { return g(y) * d.density(y); }, a, b);
            continue;
        }
        double va = d.tail(a);
        double vb = d.tail(b);
        if (va > vb)
        {
            result += integrate([&](double v) { return g(d.tail_point(v)); }, vb, va);
        }
    }
    return result;
}
}  // namespace detail

//---------------------------------------------------------------------------//
//! A numerically evaluated ratio with its error budget.
struct RatioValue
{
    double x = 0;
    double ratio = 0;
    //! Quadrature error plus truncation bound, propagated to the ratio.
    double error_bound = 0;
};

//---------------------------------------------------------------------------//
/*!
 * Tail of the self-convolution at x divided by the tail at x.
 *
 * Uses the exact split
 *   P{Y1 + Y2 > x} = 2 E[tail(x - Y); Y <= x/2] + tail(x/2)^2,
 * which keeps the integrand bounded by tail(x/2). The continuous part of the
 * expectation is truncated where the neglected mass falls below 1e-14
 * relative to tail(x).
 */
inline RatioValue convolution_tail_ratio(Distribution const& d, double x)
{
    double denom = d.tail(x);
    if (!(denom > 0))
    {
        throw UndefinedRatio("convolution_tail_ratio: tail(" + std::to_string(x)
                             + ") is zero");
    }
    double half = 0.5 * x;
    double th = d.tail(half);
    double cut = std::max(truncation_tail * denom / th, std::numeric_limits<double>::min());
    double hi = std::min(half, d.tail_point(cut));
    double truncation = half > hi ? d.tail(hi) * th : 0.0;
    auto g = [&](double y) { return d.tail(x - y); };
    auto inner = detail::expect(d, g, d.lower(), hi, {x - d.lower()});
    double conv = 2 * inner.value + th * th;
    double err = 2 * (inner.error + truncation);
    return {x, conv / denom, err / denom};
}

//---------------------------------------------------------------------------//
/*!
 * Windowed self-convolution of the tail relative to its limit:
 *   int_0^x tail(x-y) tail(y) dy / (2 tail(x) int_0^inf tail(y) dy).
 */
inline RatioValue sstar_ratio(Distribution const& d, double x)
{
    if (!d.has_finite_mean())
    {
        throw InfiniteIntegral("sstar_ratio requires a finite mean: "
                               + d.describe());
    }
    double tx = d.tail(x);
    if (!(tx > 0))
    {
        throw UndefinedRatio("sstar_ratio: tail(" + std::to_string(x)
                             + ") is zero");
    }
    auto total = d.window_integral(0, infinity);
    // The integrand is symmetric about x/2.
    std::vector<double> cuts = {0.0, 0.5 * x};
    for (double k : {d.lower(), x - d.lower()})
    {
        if (k > 0 && k < 0.5 * x)
        {
            cuts.push_back(k);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    Quadrature half;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    {
        half += integrate(
            [&](double y) { return d.tail(x - y) * d.tail(y); },
            cuts[i],
            cuts[i + 1]);
    }
    double denom = 2 * tx * total.value;
    double ratio = 2 * half.value / denom;
    double err = 2 * half.error / denom + ratio * total.error / total.value;
    return {x, ratio, err};
}

//---------------------------------------------------------------------------//
/*!
 * Tail of G * B at x divided by the tail of B at x.
 *
 * For light-tailed G and long-tailed B this tends to one.
 */
inline RatioValue light_long_convolution_ratio(Distribution const& g,
                                               Distribution const& b,
                                               double x)
{
    double denom = b.tail(x);
    if (!(denom > 0))
    {
        throw UndefinedRatio("light_long_convolution_ratio: tail of b is zero");
    }
    double cut = std::max(truncation_tail * denom, std::numeric_limits<double>::min());
    double hi = g.tail_point(cut);
    double truncation = g.is_deterministic() ? 0.0 : g.tail(hi);
    auto f = [&](double s) { return b.tail(x - s); };
    auto q = detail::expect(g, f, g.lower(), hi, {x - b.lower()});
    return {x, q.value / denom, (q.error + truncation) / denom};
}

//---------------------------------------------------------------------------//
struct SmallTauRow
{
    double x = 0;
    double ratio = 0;
};

struct SmallTauReport
{
    std::vector<SmallTauRow> rows;
    bool passed = false;
};

/*!
 * Check P{c tau > x} = o(tail_B(x)) along a grid.
 *
 * The check passes when the ratio is nonincreasing along the grid and either
 * reaches zero or ends strictly below its first value.
 */
inline SmallTauReport check_small_tau_condition(Distribution const& tau,
                                                double c,
                                                Distribution const& jump,
                                                std::vector<double> const& grid)
{
    if (!(c > 0))
    {
        throw InvalidParameter("check_small_tau_condition requires c > 0");
    }
    SmallTauReport report;
    for (double x : grid)
    {
        double tb = jump.tail(x);
        double tt = tau.tail(x / c);
        double r = tt == 0 ? 0.0 : (tb > 0 ? tt / tb : infinity);
        report.rows.push_back({x, r});
    }
    bool nonincreasing = true;
    for (std::size_t i = 1; i < report.rows.size(); ++i)
    {
        nonincreasing = nonincreasing
                        && report.rows[i].ratio <= report.rows[i - 1].ratio;
    }
    bool decays = !report.rows.empty()
                  && (report.rows.back().ratio == 0
                      || report.rows.back().ratio < report.rows.front().ratio);
    report.passed = nonincreasing && decays;
    return report;
}

//! Default grid used when a theorem requires the small-tau condition.
inline std::vector<double> default_tau_grid()
{
    return {1e1, 1e2, 1e3, 1e4, 1e5};
}

}  // namespace bigjump
