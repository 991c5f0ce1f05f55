#pragma once

#include <stdexcept>
#include <string>

namespace bigjump
{
//---------------------------------------------------------------------------//
/*!
 * Base class for every error raised by the library.
 *
 * Theorem preconditions are surfaced as named exceptions rather than NaN
 * values so that experiment runners can report which condition failed.
 */
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! A distribution or process parameter is outside its valid range.
class InvalidParameter : public Error
{
  public:
    using Error::Error;
};

//! An integral of a tail diverges (infinite mean).
class InfiniteIntegral : public Error
{
  public:
    using Error::Error;
};

//! A ratio has a zero denominator.
class UndefinedRatio : public Error
{
  public:
    using Error::Error;
};

//! Too few Monte Carlo events to form an estimate.
class InsufficientHits : public Error
{
  public:
    using Error::Error;
};

//! Grids passed to a comparison do not line up.
class MisalignedGrids : public Error
{
  public:
    using Error::Error;
};

//! Experiment configuration does not validate.
class SchemaError : public Error
{
  public:
    using Error::Error;
};

//---------------------------------------------------------------------------//
/*!
 * A hypothesis of an asymptotic formula does not hold.
 *
 * \c condition() names the failed hypothesis, e.g. "net-profit condition" or
 * "negative drift".
 */
class PreconditionViolated : public Error
{
  public:
    PreconditionViolated(std::string condition, std::string const& detail)
        : Error(condition + " violated: " + detail)
        , condition_(std::move(condition))
    {
    }

    std::string const& condition() const noexcept { return condition_; }

  private:
    std::string condition_;
};

}  // namespace bigjump
