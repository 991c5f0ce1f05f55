#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bigjump
{
//---------------------------------------------------------------------------//
/*!
 * Counter-based random stream (Philox4x32-10).
 *
 * A stream is identified by (seed, index, tag): \c seed names the experiment,
 * \c index the path and \c tag an independent substream of the same path.
 * Every output is a pure function of the identity and a draw counter, so the
 * values a path sees never depend on how paths are distributed over workers.
 */
class RandomStream
{
  public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed,
                          std::uint64_t index = 0,
                          std::uint32_t tag = 0) noexcept
        : seed_(seed), index_(index), tag_(tag)
    {
        key_ = {static_cast<std::uint32_t>(seed),
                static_cast<std::uint32_t>(seed >> 32) ^ (tag * 0x9E3779B9u)};
    }

    //! Independent stream for the same path with a different tag.
    RandomStream substream(std::uint32_t tag) const noexcept
    {
        return RandomStream(seed_, index_, tag_ + tag * 0x85EBCA6Bu + 1);
    }

    //! Stream for another path of the same experiment.
    RandomStream for_path(std::uint64_t index) const noexcept
    {
        return RandomStream(seed_, index, tag_);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept
    {
        if (buffered_ == 0)
        {
            refill();
        }
        --buffered_;
        return buffer_[buffered_];
    }

    //! Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    //! Standard normal via Box-Muller; pairs are cached.
    double normal() noexcept
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(-2 * std::log(uniform()));
        double theta = 2 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    //! Exponential with unit rate.
    double exponential() noexcept { return -std::log(uniform()); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t index() const noexcept { return index_; }
    std::uint64_t draws() const noexcept { return counter_; }

  private:
    using Block = std::array<std::uint32_t, 4>;

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint32_t tag_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_ = 0;
    bool has_spare_ = false;

    static void round(Block& ctr, std::array<std::uint32_t, 2> const& key) noexcept
    {
        constexpr std::uint64_t m0 = 0xD2511F53u;
        constexpr std::uint64_t m1 = 0xCD9E8D57u;
        std::uint64_t p0 = m0 * ctr[0];
        std::uint64_t p1 = m1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
    }

    void refill() noexcept
    {
        Block ctr = {static_cast<std::uint32_t>(counter_),
                     static_cast<std::uint32_t>(counter_ >> 32),
                     static_cast<std::uint32_t>(index_),
                     static_cast<std::uint32_t>(index_ >> 32)};
        auto key = key_;
        for (int i = 0; i < 10; ++i)
        {
            round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        ++counter_;
        buffer_[0] = (std::uint64_t(ctr[0]) << 32) | ctr[1];
        buffer_[1] = (std::uint64_t(ctr[2]) << 32) | ctr[3];
        buffered_ = 2;
    }
};

}  // namespace bigjump
