#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace bigjump
{
//! Value of an integral together with an estimate of its absolute error.
struct Quadrature
{
    double value = 0;
    double error = 0;

    Quadrature& operator+=(Quadrature const& other)
    {
        value += other.value;
        error += other.error;
        return *this;
    }
};

struct QuadratureOptions
{
    double rel_tol = 1e-8;
    double abs_floor = 1e-300;
    int max_depth = 48;
    //! Upper bound on doubling pieces for semi-infinite ranges.
    int max_pieces = 4000;
};

namespace detail
{
template<class F>
Quadrature simpson_step(F const& f,
                        double a,
                        double fa,
                        double m,
                        double fm,
                        double b,
                        double fb,
                        double whole,
                        double tol,
                        int depth)
{
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = f(lm);
    double frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15 * tol || m - a <= 0
        || b - m <= 0)
    {
        return {left + right + delta / 15, std::abs(delta) / 15};
    }
    auto l = simpson_step(f, a, fa, lm, flm, m, fm, left, tol / 2, depth - 1);
    auto r = simpson_step(f, m, fm, rm, frm, b, fb, right, tol / 2, depth - 1);
    l += r;
    return l;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Adaptive Simpson quadrature on a finite interval.
 *
 * The absolute tolerance is the relative tolerance applied to a 64-panel
 * composite Simpson estimate of the integral, floored at \c abs_floor.
 */
template<class F>
Quadrature integrate(F const& f, double a, double b, QuadratureOptions opts = {})
{
    if (!(b > a))
    {
        return {};
    }
    constexpr int panels = 64;
    double h = (b - a) / panels;
    double coarse = 0;
    Quadrature total;
    // Adapt on each panel separately so that localized features (kinks,
    // peaks near the lower end of a heavy tail) are refined independently.
    double xs[panels + 1];
    double fs[panels + 1];
    double fm[panels];
    xs[0] = a;
    fs[0] = f(a);
    for (int i = 1; i <= panels; ++i)
    {
        xs[i] = (i == panels) ? b : a + i * h;
        fs[i] = f(xs[i]);
        fm[i - 1] = f(0.5 * (xs[i - 1] + xs[i]));
        coarse += (xs[i] - xs[i - 1]) / 6 * (fs[i - 1] + 4 * fm[i - 1] + fs[i]);
    }
    double tol = std::max(opts.rel_tol * std::abs(coarse), opts.abs_floor);
    for (int i = 0; i < panels; ++i)
    {
        double m = 0.5 * (xs[i] + xs[i + 1]);
        double whole = (xs[i + 1] - xs[i]) / 6 * (fs[i] + 4 * fm[i] + fs[i + 1]);
        total += detail::simpson_step(f,
                                      xs[i],
                                      fs[i],
                                      m,
                                      fm[i],
                                      xs[i + 1],
                                      fs[i + 1],
                                      whole,
                                      tol / panels,
                                      opts.max_depth);
    }
    return total;
}

//---------------------------------------------------------------------------//
/*!
 * Integrate a nonnegative, eventually nonincreasing function over [a, inf).
 *
 * The range is covered by pieces of doubling width. Once successive pieces
 * shrink geometrically, the remainder is extrapolated from the last ratio and
 * added to the error bound; iteration stops when that remainder falls below
 * the relative tolerance.
 */
template<class F>
Quadrature integrate_to_infinity(F const& f,
                                 double a,
                                 double initial_width,
                                 QuadratureOptions opts = {})
{
    Quadrature total;
    double width = initial_width > 0 ? initial_width : 1.0;
    double lo = a;
    double prev_piece = std::numeric_limits<double>::quiet_NaN();
    for (int piece = 0; piece < opts.max_pieces; ++piece)
    {
        double hi = lo + width;
        if (!std::isfinite(hi))
        {
            break;
        }
        auto q = integrate(f, lo, hi, opts);
        total += q;
        double remainder = q.value;
        if (std::isfinite(prev_piece) && prev_piece > 0 && q.value < prev_piece)
        {
            double ratio = q.value / prev_piece;
            remainder = q.value * ratio / (1 - ratio);
        }
        if (q.value <= opts.abs_floor
            || (piece > 2 && remainder <= opts.rel_tol * total.value))
        {
            total.error += std::abs(remainder);
            return total;
        }
        prev_piece = q.value;
        lo = hi;
        width *= 2;
    }
    // Ran out of pieces: report the last piece as the unresolved remainder.
    total.error += std::abs(prev_piece);
    return total;
}

}  // namespace bigjump
