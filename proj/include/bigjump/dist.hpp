#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace bigjump
{
//---------------------------------------------------------------------------//
enum class Family
{
    pareto,
    weibull,
    lognormal,
    exponential,
    deterministic
};

inline char const* to_string(Family f)
{
    switch (f)
    {
        case Family::pareto: return "pareto";
        case Family::weibull: return "weibull";
        case Family::lognormal: return "lognormal";
        case Family::exponential: return "exponential";
        case Family::deterministic: return "deterministic";
    }
    return "unknown";
}

//! Tail classes a family is documented to belong to.
enum TailClass : unsigned
{
    long_tailed = 1u << 0,
    subexponential = 1u << 1,
    strong_subexponential = 1u << 2,
    light_tailed = 1u << 3,
};

class ClassSet
{
  public:
    constexpr ClassSet() = default;
    constexpr explicit ClassSet(unsigned bits) : bits_(bits) {}

    constexpr bool has(TailClass c) const { return (bits_ & c) != 0; }
    constexpr unsigned bits() const { return bits_; }
    friend constexpr bool operator==(ClassSet, ClassSet) = default;

  private:
    unsigned bits_ = 0;
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

//---------------------------------------------------------------------------//
/*!
 * A parametric law on the real line.
 *
 * The base families are Pareto(alpha, x_m), Weibull(shape, scale),
 * Lognormal(mu, sigma), Exponential(rate) and Deterministic(value). On top of
 * a base law Z a distribution may carry a shift (Y = Z - shift) and may be
 * replaced by its positive part Y^+ = max(Y, 0), which has an atom at zero of
 * mass P{Y <= 0}. All tails are evaluated exactly from the base family.
 *
 * Values are immutable after construction; sampling draws from the caller's
 * stream.
 */
class Distribution
{
  public:
    //!@{
    //! \name Construction
    static Distribution pareto(double alpha, double xm)
    {
        require(alpha > 0, "pareto alpha must be positive");
        require(xm > 0, "pareto xm must be positive");
        return Distribution(Family::pareto, alpha, xm);
    }
    static Distribution weibull(double shape, double scale)
    {
        require(shape > 0, "weibull shape must be positive");
        require(scale > 0, "weibull scale must be positive");
        return Distribution(Family::weibull, shape, scale);
    }
    static Distribution lognormal(double mu, double sigma)
    {
        require(std::isfinite(mu), "lognormal mu must be finite");
        require(sigma > 0, "lognormal sigma must be positive");
        return Distribution(Family::lognormal, mu, sigma);
    }
    static Distribution exponential(double rate)
    {
        require(rate > 0, "exponential rate must be positive");
        return Distribution(Family::exponential, rate, 0);
    }
    static Distribution deterministic(double value)
    {
        require(std::isfinite(value), "deterministic value must be finite");
        return Distribution(Family::deterministic, value, 0);
    }
    //!@}

    //! Law of Z - shift where Z has this law.
    Distribution shifted(double shift) const
    {
        require(std::isfinite(shift), "shift must be finite");
        require(!positive_part_, "cannot shift a positive-part law");
        Distribution d = *this;
        d.shift_ += shift;
        return d;
    }

    //! Law of max(Y, 0).
    Distribution positive_part() const
    {
        Distribution d = *this;
        if (base_lower() - shift_ < 0)
        {
            d.positive_part_ = true;
        }
        return d;
    }

    Family family() const { return family_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }
    double shift() const { return shift_; }
    bool is_positive_part() const { return positive_part_; }
    bool is_deterministic() const { return family_ == Family::deterministic; }

    //! Survival function P{Y > x}.
    double tail(double x) const
    {
        if (positive_part_ && x < 0)
        {
            return 1;
        }
        return base_tail(x + shift_);
    }

    double cdf(double x) const { return 1 - tail(x); }

    //! Density of the absolutely continuous part (zero for point masses).
    double density(double x) const
    {
        if (positive_part_ && x <= 0)
        {
            return 0;
        }
        return base_density(x + shift_);
    }

    //! Left end of the support.
    double lower() const
    {
        double lo = base_lower() - shift_;
        return positive_part_ ? std::max(lo, 0.0) : lo;
    }

    //! Probability mass sitting at \c lower().
    double atom() const
    {
        if (family_ == Family::deterministic)
        {
            return 1;
        }
        if (positive_part_)
        {
            return 1 - base_tail(shift_);
        }
        return 0;
    }

    //! Analytic mean; +inf when the mean diverges.
    double mean() const
    {
        if (positive_part_)
        {
            return uncapped_integral(0);
        }
        return base_mean() - shift_;
    }

    bool has_finite_mean() const { return std::isfinite(mean()); }

    ClassSet claimed_classes() const
    {
        switch (family_)
        {
            case Family::pareto:
                return ClassSet(long_tailed | subexponential
                                | (p1_ > 1 ? strong_subexponential : 0u));
            case Family::weibull:
                return p2_ > 0 && p1_ < 1
                           ? ClassSet(long_tailed | subexponential
                                      | strong_subexponential)
                           : ClassSet(light_tailed);
            case Family::lognormal:
                return ClassSet(long_tailed | subexponential
                                | strong_subexponential);
            case Family::exponential:
            case Family::deterministic: return ClassSet(light_tailed);
        }
        return {};
    }

    /*!
     * Inverse of the distribution function for the inverse-transform
     * families, evaluated at probability \c u in (0, 1).
     */
    double quantile(double u) const
    {
        double z = 0;
        switch (family_)
        {
            case Family::pareto: z = p2_ * std::pow(1 - u, -1 / p1_); break;
            case Family::weibull:
                z = p2_ * std::pow(-std::log1p(-u), 1 / p1_);
                break;
            case Family::exponential: z = -std::log1p(-u) / p1_; break;
            case Family::deterministic: z = p1_; break;
            case Family::lognormal:
                throw InvalidParameter(
                    "lognormal quantile is not provided; sample() uses the "
                    "normal transform");
        }
        double y = z - shift_;
        return positive_part_ ? std::max(y, 0.0) : y;
    }

    template<class Stream>
    double sample(Stream& rng) const
    {
        if (family_ == Family::deterministic)
        {
            return clamp(p1_ - shift_);
        }
        if (family_ == Family::lognormal)
        {
            return clamp(std::exp(p1_ + p2_ * rng.normal()) - shift_);
        }
        return quantile(1 - rng.uniform());
    }

    /*!
     * Smallest x (to within bisection accuracy) with tail(x) <= p.
     *
     * Used to truncate quadrature over an unbounded support.
     */
    double tail_point(double p) const
    {
        if (p >= 1)
        {
            return lower();
        }
        double z = 0;
        switch (family_)
        {
            case Family::pareto: z = p2_ * std::pow(p, -1 / p1_); break;
            case Family::weibull: z = p2_ * std::pow(-std::log(p), 1 / p1_); break;
            case Family::exponential: z = -std::log(p) / p1_; break;
            case Family::deterministic: z = p1_; break;
            case Family::lognormal:
            {
                double lo = 0;
                double hi = 1;
                while (normal_tail(hi) > p)
                {
                    hi *= 2;
                }
                for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i)
                {
                    double mid = 0.5 * (lo + hi);
                    (normal_tail(mid) > p ? lo : hi) = mid;
                }
                z = std::exp(p1_ + p2_ * hi);
                break;
            }
        }
        return std::max(z - shift_, lower());
    }

    //! Whether \c uncapped_integral has a closed form.
    bool has_closed_form_integral() const
    {
        return family_ == Family::pareto || family_ == Family::exponential
               || family_ == Family::deterministic
               || (family_ == Family::weibull && p1_ == 1);
    }

    /*!
     * Closed-form integral of the tail over [x, inf); +inf for a divergent
     * integral. Only valid when \c has_closed_form_integral() holds.
     */
    double closed_form_integral(double x) const
    {
        if (positive_part_ && x < 0)
        {
            return -x + closed_form_integral(0);
        }
        double w = x + shift_;
        switch (family_)
        {
            case Family::pareto:
            {
                if (p1_ <= 1)
                {
                    return infinity;
                }
                double above = std::pow(p2_, p1_) / (p1_ - 1);
                return w >= p2_ ? above * std::pow(w, 1 - p1_)
                                : (p2_ - w) + p2_ / (p1_ - 1);
            }
            case Family::exponential:
                return w >= 0 ? std::exp(-p1_ * w) / p1_ : -w + 1 / p1_;
            case Family::weibull:
                return w >= 0 ? p2_ * std::exp(-w / p2_) : -w + p2_;
            case Family::deterministic: return std::max(0.0, p1_ - w);
            default: break;
        }
        throw InvalidParameter("no closed-form tail integral for this family");
    }

    //! Tail integral over [x, inf) by closed form or quadrature.
    double uncapped_integral(double x) const
    {
        return window_integral(x, infinity).value;
    }

    /*!
     * Integral of the tail over [x, x + length], with an absolute error
     * bound. \c length may be infinite; a divergent integral yields +inf.
     */
    Quadrature window_integral(double x, double length) const
    {
        if (!(length > 0))
        {
            return {};
        }
        if (has_closed_form_integral())
        {
            return {closed_form_window(x, length), 0};
        }
        Quadrature result;
        double lo = lower();
        double start = x;
        double end = x + length;
        if (start < lo)
        {
            // tail == 1 below the support
            double below = std::min(end, lo) - start;
            result.value += below;
            start = lo;
        }
        if (!(end > start))
        {
            return result;
        }
        auto f = [this](double v) { return this->tail(v); };
        if (std::isinf(end))
        {
            if (!std::isfinite(base_mean()))
            {
                return {infinity, 0};
            }
            double width = std::max({1.0, std::abs(start), tail_scale()});
            result += integrate_to_infinity(f, start, width);
        }
        else
        {
            result += integrate(f, start, end);
        }
        return result;
    }

    std::string describe() const
    {
        std::ostringstream os;
        os << to_string(family_) << '(';
        switch (family_)
        {
            case Family::pareto: os << "alpha=" << p1_ << ", xm=" << p2_; break;
            case Family::weibull: os << "shape=" << p1_ << ", scale=" << p2_; break;
            case Family::lognormal: os << "mu=" << p1_ << ", sigma=" << p2_; break;
            case Family::exponential: os << "rate=" << p1_; break;
            case Family::deterministic: os << "value=" << p1_; break;
        }
        os << ')';
        if (shift_ != 0)
        {
            os << " - " << shift_;
        }
        if (positive_part_)
        {
            os << " [positive part]";
        }
        return os.str();
    }

  private:
    Family family_;
    double p1_;
    double p2_;
    double shift_ = 0;
    bool positive_part_ = false;

    Distribution(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2)
    {
    }

    static void require(bool ok, char const* what)
    {
        if (!ok)
        {
            throw InvalidParameter(what);
        }
    }

    static double normal_tail(double z)
    {
        return 0.5 * std::erfc(z / std::numbers::sqrt2);
    }

    double clamp(double y) const { return positive_part_ ? std::max(y, 0.0) : y; }

    double base_lower() const
    {
        switch (family_)
        {
            case Family::pareto: return p2_;
            case Family::deterministic: return p1_;
            default: return 0;
        }
    }

    double base_tail(double z) const
    {
        switch (family_)
        {
            case Family::pareto: return z <= p2_ ? 1 : std::pow(p2_ / z, p1_);
            case Family::weibull:
                return z <= 0 ? 1 : std::exp(-std::pow(z / p2_, p1_));
            case Family::lognormal:
                return z <= 0 ? 1 : normal_tail((std::log(z) - p1_) / p2_);
            case Family::exponential: return z <= 0 ? 1 : std::exp(-p1_ * z);
            case Family::deterministic: return z < p1_ ? 1 : 0;
        }
        return 0;
    }

    double base_density(double z) const
    {
        switch (family_)
        {
            case Family::pareto:
                return z < p2_ ? 0 : p1_ / z * std::pow(p2_ / z, p1_);
            case Family::weibull:
            {
                if (z <= 0)
                {
                    return 0;
                }
                double r = std::pow(z / p2_, p1_);
                return p1_ / z * r * std::exp(-r);
            }
            case Family::lognormal:
            {
                if (z <= 0)
                {
                    return 0;
                }
                double u = (std::log(z) - p1_) / p2_;
                return std::exp(-0.5 * u * u)
                       / (z * p2_ * std::sqrt(2 * std::numbers::pi));
            }
            case Family::exponential: return z < 0 ? 0 : p1_ * std::exp(-p1_ * z);
            case Family::deterministic: return 0;
        }
        return 0;
    }

    double base_mean() const
    {
        switch (family_)
        {
            case Family::pareto:
                return p1_ > 1 ? p1_ * p2_ / (p1_ - 1) : infinity;
            case Family::weibull: return p2_ * std::tgamma(1 + 1 / p1_);
            case Family::lognormal: return std::exp(p1_ + 0.5 * p2_ * p2_);
            case Family::exponential: return 1 / p1_;
            case Family::deterministic: return p1_;
        }
        return 0;
    }

    //! Rough width over which the tail decays; seeds the doubling search.
    double tail_scale() const
    {
        switch (family_)
        {
            case Family::weibull: return p2_;
            case Family::lognormal: return std::exp(p1_);
            default: return 1;
        }
    }

    double closed_form_window(double x, double length) const
    {
        double upper_rest = std::isinf(length) ? 0 : closed_form_integral(x + length);
        double from_x = closed_form_integral(x);
        if (std::isinf(from_x))
        {
            if (std::isinf(length))
            {
                return infinity;
            }
            return pareto_window_divergent(x, x + length);
        }
        return std::max(0.0, from_x - upper_rest);
    }

    //! Finite window for a Pareto law whose full tail integral diverges.
    double pareto_window_divergent(double a, double b) const
    {
        auto piece = [this](double u, double v) {
            // integral of tail over [u, v] in base coordinates, u >= xm
            double xm = p2_;
            double alpha = p1_;
            if (alpha == 1)
            {
                return xm * std::log(v / u);
            }
            return std::pow(xm, alpha) / (1 - alpha)
                   * (std::pow(v, 1 - alpha) - std::pow(u, 1 - alpha));
        };
        double total = 0;
        if (positive_part_ && a < 0)
        {
            total += std::min(b, 0.0) - a;
            a = 0;
            if (b <= a)
            {
                return total;
            }
        }
        double wa = a + shift_;
        double wb = b + shift_;
        if (wa < p2_)
        {
            total += std::min(wb, p2_) - wa;
            wa = p2_;
        }
        if (wb > wa)
        {
            total += piece(wa, wb);
        }
        return total;
    }
};

//---------------------------------------------------------------------------//
/*!
 * Tail of the integrated tail distribution, min(1, integral of tail over
 * [x, inf)), plus whether the cap was hit.
 */
struct IntegratedTail
{
    double value = 0;
    double error = 0;
    bool capped = false;
};

inline IntegratedTail integrated_tail_detail(Distribution const& d, double x)
{
    auto q = d.window_integral(x, infinity);
    if (std::isinf(q.value))
    {
        throw InfiniteIntegral("integrated tail diverges for " + d.describe()
                               + " (infinite mean)");
    }
    if (q.value >= 1)
    {
        return {1, 0, true};
    }
    return {q.value, q.error, false};
}

inline double integrated_tail(Distribution const& d, double x)
{
    return integrated_tail_detail(d, x).value;
}

}  // namespace bigjump
