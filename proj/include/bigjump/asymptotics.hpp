#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dist.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "process.hpp"
#include "simulate.hpp"
#include "tailmath.hpp"

namespace bigjump
{
//---------------------------------------------------------------------------//
enum class FormulaId
{
    rw_global,
    rw_finite,
    renewal_finite,
    renewal_infty,
    levy_finite,
    levy_infty,
    stopped_general,
    stopped_mean,
    ruin_finite,
    ruin_infty,
    fixed_t_equiv
};

inline char const* to_string(FormulaId f)
{
    switch (f)
    {
        case FormulaId::rw_global: return "RW_GLOBAL";
        case FormulaId::rw_finite: return "RW_FINITE";
        case FormulaId::renewal_finite: return "RENEWAL_FINITE";
        case FormulaId::renewal_infty: return "RENEWAL_INFTY";
        case FormulaId::levy_finite: return "LEVY_FINITE";
        case FormulaId::levy_infty: return "LEVY_INFTY";
        case FormulaId::stopped_general: return "STOPPED_GENERAL";
        case FormulaId::stopped_mean: return "STOPPED_MEAN";
        case FormulaId::ruin_finite: return "RUIN_FINITE";
        case FormulaId::ruin_infty: return "RUIN_INFTY";
        case FormulaId::fixed_t_equiv: return "FIXED_T_EQUIV";
    }
    return "UNKNOWN";
}

//! Qualifiers attached to an estimate or comparison row.
enum EstimateFlag : unsigned
{
    //! The integrated tail was capped at one: x is below the tail regime.
    pre_asymptotic = 1u << 0,
    //! Hypotheses of the formula are not met (e.g. no heavy jumps at all).
    out_of_scope = 1u << 1,
    //! Degenerate horizon (n = 0 or t = 0).
    degenerate = 1u << 2,
    //! Monte Carlo estimate with fewer than ten hits.
    low_hits = 1u << 3,
};

inline std::string flags_to_string(unsigned flags)
{
    std::string s;
    auto add = [&](unsigned bit, char const* name) {
        if (flags & bit)
        {
            if (!s.empty())
            {
                s += '|';
            }
            s += name;
        }
    };
    add(pre_asymptotic, "pre_asymptotic");
    add(out_of_scope, "out_of_scope");
    add(degenerate, "degenerate");
    add(low_hits, "low_hits");
    return s;
}

//---------------------------------------------------------------------------//
/*!
 * Right-hand side of a tail-asymptotic formula evaluated at one point.
 */
struct AsymptoticEstimate
{
    FormulaId formula = FormulaId::rw_global;
    double value = 0;
    double x = 0;
    //! Horizon (steps for random walks); infinity for overall maxima.
    double t = infinity;
    double quadrature_error = 0;
    unsigned flags = 0;
    //! Echo of the resolved inputs.
    std::vector<std::pair<std::string, double>> inputs;
    std::string note;

    bool has(EstimateFlag f) const { return (flags & f) != 0; }
};

//---------------------------------------------------------------------------//
/*!
 * Tail function F(v) = scale * tail_law(v).
 *
 * For Levy processes this is the tail of the Levy measure, lambda times the
 * tail of the big-jump law.
 */
struct TailKernel
{
    Distribution law;
    double scale = 1;

    double tail(double v) const { return scale * law.tail(v); }

    Quadrature integral(double x, double length) const
    {
        auto q = tail_integral(law, x, length);
        return {scale * q.value, scale * q.error};
    }

    //! Whether the integral over [x, inf) reaches one.
    bool capped_at(double x) const
    {
        return scale * law.uncapped_integral(x) >= 1;
    }
};

namespace detail
{
inline void require_negative(double a, char const* what)
{
    if (!(a < 0))
    {
        throw PreconditionViolated("negative drift",
                                   std::string(what) + " = "
                                       + std::to_string(a) + " must be < 0");
    }
}

inline void require_strong_subexponential(Distribution const& d, char const* role)
{
    if (!d.claimed_classes().has(strong_subexponential))
    {
        throw PreconditionViolated("strong subexponential",
                                   std::string(role) + " " + d.describe()
                                       + " is not claimed to be in S*");
    }
}

inline void require_finite_mean(Distribution const& d, char const* role)
{
    if (!d.has_finite_mean())
    {
        throw PreconditionViolated("finite mean",
                                   std::string(role) + " " + d.describe()
                                       + " has infinite mean");
    }
}

//! (1/|a|) int_x^{x+window} F, with the integrated-tail cap flag.
inline AsymptoticEstimate kernel_window(TailKernel const& kernel,
                                        double abs_a,
                                        double x,
                                        double window,
                                        FormulaId id,
                                        double t)
{
    AsymptoticEstimate e;
    e.formula = id;
    e.x = x;
    e.t = t;
    if (kernel.capped_at(x))
    {
        e.flags |= pre_asymptotic;
    }
    if (std::isinf(window))
    {
        auto q = kernel.integral(x, infinity);
        double capped = std::min(1.0, q.value);
        e.value = capped / abs_a;
        e.quadrature_error = (q.value >= 1 ? 0.0 : q.error) / abs_a;
    }
    else
    {
        // A window never carries more than the capped full integral.
        auto q = kernel.integral(x, window);
        e.value = std::min(1.0, q.value) / abs_a;
        e.quadrature_error = (q.value >= 1 ? 0.0 : q.error) / abs_a;
    }
    return e;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Overall maximum of a random walk with mean increment b < 0:
 * P{M > x} ~ tail_{B_I}(x) / |b| with B the law of Y^+.
 */
inline AsymptoticEstimate
rw_max_global(Distribution const& jump, double b, double x)
{
    detail::require_negative(b, "mean increment b");
    Distribution positive = jump.positive_part();
    detail::require_finite_mean(positive, "law of Y^+");
    detail::require_strong_subexponential(jump, "jump law");
    auto e = detail::kernel_window(
        {positive, 1}, -b, x, infinity, FormulaId::rw_global, infinity);
    e.inputs = {{"b", b}, {"x", x}};
    return e;
}

/*!
 * Maximum of the first n steps:
 * P{M_n > x} ~ (1/|b|) int_x^{x + n|b|} tail_B(v) dv.
 */
inline AsymptoticEstimate
rw_max_finite(Distribution const& jump, double b, std::uint64_t n, double x)
{
    detail::require_negative(b, "mean increment b");
    detail::require_strong_subexponential(jump, "jump law");
    Distribution positive = jump.positive_part();
    auto steps = static_cast<double>(n);
    if (n == 0)
    {
        AsymptoticEstimate e;
        e.formula = FormulaId::rw_finite;
        e.x = x;
        e.t = 0;
        e.flags = degenerate;
        e.inputs = {{"b", b}, {"n", 0}, {"x", x}};
        return e;
    }
    auto e = detail::kernel_window(
        {positive, 1}, -b, x, steps * -b, FormulaId::rw_finite, steps);
    e.inputs = {{"b", b}, {"n", steps}, {"x", x}};
    return e;
}

//---------------------------------------------------------------------------//
/*!
 * Compound renewal process with linear drift, finite horizon:
 * P{M_t > x} ~ (1/|a|) int_x^{x + |a| E N_t} tail_B(v) dv, a = c/lambda + b.
 *
 * For c > 0 the interarrival tail must satisfy P{c tau > x} = o(tail_B(x)),
 * checked on a decade grid. \c ent_stderr, when the renewal function was
 * estimated by simulation, is propagated into the error bound.
 */
inline AsymptoticEstimate renewal_finite(ProcessSpec const& spec,
                                         double t,
                                         double x,
                                         double ent,
                                         double ent_stderr = 0)
{
    if (spec.kind != ProcessKind::compound_renewal)
    {
        throw InvalidParameter("renewal_finite needs a compound renewal spec");
    }
    double a = spec.per_jump_drift();
    detail::require_negative(a, "per-jump drift a = c/lambda + b");
    detail::require_strong_subexponential(spec.jump_law, "jump law");
    if (spec.drift > 0)
    {
        auto report = check_small_tau_condition(
            *spec.interarrival, spec.drift, spec.jump_law, default_tau_grid());
        if (!report.passed)
        {
            std::string detail = "P{c tau > x} / tail_B(x) along x = ";
            for (auto const& r : report.rows)
            {
                detail += std::to_string(r.x) + ":" + std::to_string(r.ratio) + " ";
            }
            throw PreconditionViolated("small interarrival tail condition",
                                       detail);
        }
    }
    Distribution positive = spec.jump_law.positive_part();
    double abs_a = -a;
    auto e = detail::kernel_window(
        {positive, 1}, abs_a, x, abs_a * ent, FormulaId::renewal_finite, t);
    if (t <= 0 || ent <= 0)
    {
        e.flags |= degenerate;
    }
    // d value / d E N_t = tail_B(x + |a| E N_t)
    e.quadrature_error += positive.tail(x + abs_a * ent) * ent_stderr;
    e.inputs = {{"a", a}, {"lambda", spec.intensity()}, {"c", spec.drift},
                {"ENt", ent}, {"ENt_stderr", ent_stderr}, {"t", t}, {"x", x}};
    return e;
}

/*!
 * Overall maximum of a compound renewal process with linear drift:
 * P{M_inf > x} ~ (1/|a|) int_x^inf P{c tau + Y^+ > v} dv.
 *
 * The integral is evaluated as E[I_B(x - c tau)] with I_B(z) the tail
 * integral of Y^+ from z, which avoids a nested quadrature.
 */
inline AsymptoticEstimate renewal_infty_with_tau(ProcessSpec const& spec, double x)
{
    if (spec.kind != ProcessKind::compound_renewal)
    {
        throw InvalidParameter(
            "renewal_infty_with_tau needs a compound renewal spec");
    }
    double a = spec.per_jump_drift();
    detail::require_negative(a, "per-jump drift a = c/lambda + b");
    detail::require_strong_subexponential(spec.jump_law, "jump law");
    Distribution positive = spec.jump_law.positive_part();
    Distribution const& tau = *spec.interarrival;
    double c = spec.drift;
    auto uncapped = [&](double z) { return positive.uncapped_integral(z); };

    Quadrature q;
    if (c == 0 || tau.is_deterministic())
    {
        q.value = uncapped(x - c * tau.mean());
    }
    else
    {
        double s_max = tau.tail_point(truncation_tail);
        std::vector<double> breaks;
        double kink = (x - positive.lower()) / c;
        if (kink > tau.lower() && kink < s_max)
        {
            breaks.push_back(kink);
        }
        q = detail::expect(
            tau, [&](double s) { return uncapped(x - c * s); }, tau.lower(), s_max,
            breaks);
        double excess = tau.window_integral(s_max, infinity).value;
        q.error += std::abs(c) * excess
                   + uncapped(x - c * s_max) * tau.tail(s_max);
    }
    AsymptoticEstimate e;
    e.formula = FormulaId::renewal_infty;
    e.x = x;
    e.t = infinity;
    if (q.value >= 1)
    {
        e.flags |= pre_asymptotic;
    }
    e.value = std::min(1.0, q.value) / -a;
    e.quadrature_error = q.error / -a;
    e.inputs = {{"a", a}, {"lambda", spec.intensity()}, {"c", c}, {"x", x}};
    return e;
}

//---------------------------------------------------------------------------//
/*!
 * Jump diffusion with negative mean a = E X_1:
 * P{M_t > x} ~ (1/|a|) int_x^{x + t|a|} F(v) dv, with the tail of X_1 replaced
 * by the Levy tail F(v) = lambda * tail_jump(v). \c t may be infinite.
 */
inline AsymptoticEstimate
levy_tail(ProcessSpec const& spec, double t, double x)
{
    if (spec.kind != ProcessKind::jump_diffusion)
    {
        throw InvalidParameter("levy_tail needs a jump-diffusion spec");
    }
    FormulaId id = std::isinf(t) ? FormulaId::levy_infty : FormulaId::levy_finite;
    double lambda = spec.intensity();
    if (lambda == 0)
    {
        AsymptoticEstimate e;
        e.formula = id;
        e.x = x;
        e.t = t;
        e.flags = out_of_scope;
        e.note = "no big jumps: the tail is not heavy";
        e.inputs = {{"lambda", 0}, {"x", x}, {"t", t}};
        return e;
    }
    double a = spec.per_time_drift();
    detail::require_negative(a, "mean E X_1");
    detail::require_strong_subexponential(spec.jump_law, "big-jump law");
    double abs_a = -a;
    double window = std::isinf(t) ? infinity : t * abs_a;
    auto e = detail::kernel_window({spec.jump_law, lambda}, abs_a, x, window, id, t);
    if (t <= 0)
    {
        e.flags |= degenerate;
    }
    e.note = "tail of X_1 replaced by the Levy tail lambda * tail_jump";
    e.inputs = {{"a", a}, {"lambda", lambda}, {"sigma", spec.sigma},
                {"t", t}, {"x", x}};
    return e;
}

//---------------------------------------------------------------------------//
/*!
 * Ratio P{M_t > x} / P{X_t > x} from one experiment.
 *
 * Because {X_t > x} is contained in {M_t > x}, the covariance of the two
 * proportions is (p_X - p_M p_X) / n and the delta-method interval uses it.
 * With no discordant path the upper end is 1 + 3 / (n p_X).
 */
struct EquivalenceRatio
{
    double ratio = 0;
    double ci_lo = 0;
    double ci_hi = 0;
    bool pre_asymptotic = false;
};

inline EquivalenceRatio
fixed_t_equivalence_ratio(MCEstimate const& max_est,
                          MCEstimate const& terminal_est,
                          double pre_asymptotic_p = 0.1)
{
    if (max_est.n_paths != terminal_est.n_paths)
    {
        throw MisalignedGrids(
            "fixed_t_equivalence_ratio: estimates come from different runs");
    }
    if (terminal_est.hits == 0)
    {
        throw UndefinedRatio("fixed_t_equivalence_ratio: P{X_t > x} estimate is zero");
    }
    double n = static_cast<double>(max_est.n_paths);
    double pm = max_est.p_hat;
    double px = terminal_est.p_hat;
    double r = pm / px;
    double var_m = pm * (1 - pm) / n;
    double var_x = px * (1 - px) / n;
    double cov = (px - pm * px) / n;
    double var = (var_m + r * r * var_x - 2 * r * cov) / (px * px);
    double half = 1.96 * std::sqrt(std::max(var, 0.0));
    if (max_est.hits == terminal_est.hits)
    {
        // No path with M_t > x >= X_t: the normal interval degenerates, so
        // bound P{M_t > x >= X_t} by 3/n instead.
        return {r, r, r + 3 / (n * px), pm > pre_asymptotic_p};
    }
    return {r, r - half, r + half, pm > pre_asymptotic_p};
}

//---------------------------------------------------------------------------//
enum class StoppedMode
{
    general,
    mean
};

/*!
 * Maximum of a process stopped at an independent random time tau.
 *
 * GENERAL: (1/|a|) E int_x^{x + tau|a|} F(v) dv, by quadrature over the law
 * of tau. MEAN: E tau * F(x). For a >= 0 the MEAN form needs some c > a with
 * P{c tau > x} = o(F(x)).
 */
inline AsymptoticEstimate stopped_tail(TailKernel const& kernel,
                                       double a,
                                       Distribution const& tau,
                                       double x,
                                       StoppedMode mode)
{
    AsymptoticEstimate e;
    e.x = x;
    e.t = tau.mean();
    if (kernel.capped_at(x))
    {
        e.flags |= pre_asymptotic;
    }
    if (mode == StoppedMode::mean)
    {
        e.formula = FormulaId::stopped_mean;
        detail::require_finite_mean(tau, "stopping time");
        if (a >= 0)
        {
            double c = a + 1e-6 * std::max(1.0, std::abs(a));
            auto report = check_small_tau_condition(
                tau, c, kernel.law, default_tau_grid());
            if (!report.passed)
            {
                throw PreconditionViolated(
                    "small stopping-time tail condition",
                    "P{c tau > x} is not o(F(x)) for c slightly above E X_1");
            }
        }
        e.value = tau.mean() * kernel.tail(x);
        e.inputs = {{"a", a}, {"E_tau", tau.mean()}, {"x", x}};
        return e;
    }
    e.formula = FormulaId::stopped_general;
    detail::require_negative(a, "mean E X_1");
    double abs_a = -a;
    double s_max = tau.tail_point(truncation_tail);
    std::vector<double> breaks;
    double kink = (kernel.law.lower() - x) / abs_a;
    if (kink > tau.lower() && kink < s_max)
    {
        breaks.push_back(kink);
    }
    auto q = detail::expect(
        tau,
        [&](double s) { return kernel.integral(x, s * abs_a).value; },
        tau.lower(),
        s_max,
        breaks);
    double full = kernel.integral(x, infinity).value;
    e.value = q.value / abs_a;
    e.quadrature_error = (q.error + full * tau.tail(s_max)) / abs_a;
    e.inputs = {{"a", a}, {"E_tau", tau.mean()}, {"x", x}};
    return e;
}

//---------------------------------------------------------------------------//
/*!
 * Ruin probability in the compound renewal risk model with premium rate c:
 * psi(u, t) ~ (lambda / (c - b lambda)) int_u^{u + (c/lambda - b) E N_t}
 * tail_B(v) dv, and the same with an infinite window for t = inf.
 *
 * When \c ent is not given it is taken from the closed form for Poisson or
 * deterministic claim arrivals.
 */
inline AsymptoticEstimate ruin_approx(Distribution const& claims,
                                      double c,
                                      Distribution const& interarrival,
                                      double u,
                                      double t,
                                      std::optional<double> ent = std::nullopt,
                                      double ent_stderr = 0)
{
    if (claims.lower() < 0)
    {
        throw InvalidParameter("claim sizes must be nonnegative");
    }
    double lambda = 1 / interarrival.mean();
    double b = claims.mean();
    if (!(c > b * lambda))
    {
        throw PreconditionViolated(
            "net-profit condition",
            "premium rate c = " + std::to_string(c)
                + " must exceed b * lambda = " + std::to_string(b * lambda));
    }
    detail::require_strong_subexponential(claims, "claim size law");
    double abs_a = c / lambda - b;
    FormulaId id = std::isinf(t) ? FormulaId::ruin_infty : FormulaId::ruin_finite;
    AsymptoticEstimate e;
    if (std::isinf(t))
    {
        e = detail::kernel_window({claims, 1}, abs_a, u, infinity, id, t);
    }
    else
    {
        if (!ent)
        {
            ent = exact_expected_jump_count(interarrival, t);
            if (!ent)
            {
                throw InvalidParameter(
                    "ruin_approx: E N_t must be supplied for this claim clock");
            }
        }
        e = detail::kernel_window({claims, 1}, abs_a, u, abs_a * *ent, id, t);
        e.quadrature_error += claims.tail(u + abs_a * *ent) * ent_stderr;
        if (t <= 0)
        {
            e.flags |= degenerate;
        }
    }
    e.inputs = {{"lambda", lambda}, {"b", b}, {"c", c}, {"u", u}, {"t", t}};
    if (ent)
    {
        e.inputs.emplace_back("ENt", *ent);
    }
    return e;
}

}  // namespace bigjump
