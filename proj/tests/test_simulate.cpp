#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bigjump/simulate.hpp"

using namespace bigjump;

namespace
{
double normal_tail(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// Asymptotic p-value of the two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample_p(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = a.size();
    double nb = b.size();
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0;
    while (i < a.size() && j < b.size())
    {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v)
        {
            ++i;
        }
        while (j < b.size() && b[j] == v)
        {
            ++j;
        }
        d = std::max(d, std::abs(i / na - j / nb));
    }
    double ne = std::sqrt(na * nb / (na + nb));
    double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double q = 0;
    for (int k = 1; k < 100; ++k)
    {
        q += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
    }
    return std::clamp(q, 0.0, 1.0);
}

// Maximum of a piecewise linear renewal path found by evaluating it on a
// fine time grid plus the left and right limits at every jump.
double brute_force_max(ProcessSpec const& spec, PathResult const& path)
{
    double m = 0;
    double level = 0;
    double time = 0;
    auto walk_to = [&](double until) {
        for (double s = time; s < until; s += 1e-3)
        {
            m = std::max(m, level + spec.drift * (s - time));
        }
        level += spec.drift * (until - time);
        m = std::max(m, level);
        time = until;
    };
    for (auto const& j : path.jumps)
    {
        walk_to(j.time);
        level += j.size;
        m = std::max(m, level);
    }
    walk_to(path.horizon);
    return m;
}

ProcessSpec heavy_poisson(double c)
{
    return ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, c);
}
}  // namespace

TEST(RandomWalkMax, Examples)
{
    RandomStream rng(1);
    auto zero = rw_max(Distribution::pareto(2, 1), 0, rng);
    EXPECT_EQ(zero.max, 0);
    EXPECT_EQ(zero.sum, 0);
    auto down = rw_max(Distribution::deterministic(-1), 5, rng);
    EXPECT_EQ(down.max, 0);
    EXPECT_EQ(down.sum, -5);
    auto up = rw_max(Distribution::deterministic(2), 3, rng);
    EXPECT_EQ(up.max, 6);
    EXPECT_EQ(up.sum, 6);
}

TEST(RenewalPath, Examples)
{
    RandomStream rng(3);
    auto one = Distribution::deterministic(1);

    auto a = renewal_path_max(
        ProcessSpec::compound_renewal(Distribution::deterministic(-1), one, 0), 3.5, rng);
    EXPECT_EQ(a.max, 0);
    EXPECT_EQ(a.terminal, -3);
    EXPECT_EQ(a.n_jumps, 3u);

    auto b = renewal_path_max(
        ProcessSpec::compound_renewal(Distribution::deterministic(1), one, -2), 2.5, rng);
    EXPECT_EQ(b.max, 0);
    ASSERT_EQ(b.jumps.size(), 2u);
    EXPECT_EQ(b.jumps[0].pre_level + b.jumps[0].size, -1);
    EXPECT_EQ(b.jumps[1].pre_level + b.jumps[1].size, -2);

    auto spec_c = ProcessSpec::compound_renewal(Distribution::deterministic(1), one, 0.5);
    auto c = renewal_path_max(spec_c, 2.2, rng);
    EXPECT_NEAR(c.max, 3.1, 1e-14);
    EXPECT_NEAR(brute_force_max(spec_c, c), 3.1, 1e-12);
}

TEST(RenewalPath, JumpAtHorizonIsIncluded)
{
    RandomStream rng(3);
    auto spec = ProcessSpec::compound_renewal(
        Distribution::deterministic(1), Distribution::deterministic(1), 0);
    auto p = renewal_path_max(spec, 2, rng);
    EXPECT_EQ(p.n_jumps, 2u);
    EXPECT_EQ(p.max, 2);
}

TEST(RenewalPath, MatchesBruteForceMaximum)
{
    for (double c : {-1.5, 0.0, 0.8})
    {
        auto spec = ProcessSpec::compound_renewal(
            Distribution::pareto(2, 1).shifted(2.5), Distribution::weibull(1.5, 1), c);
        RandomStream base(11);
        for (int i = 0; i < 200; ++i)
        {
            auto rng = base.for_path(i);
            auto p = renewal_path_max(spec, 7.3, rng);
            EXPECT_NEAR(p.max, brute_force_max(spec, p), 2e-3 * std::max(1.0, std::abs(c)))
                << "c=" << c << " path " << i;
        }
    }
}

TEST(BrownianSegment, Examples)
{
    RandomStream rng(5);
    EXPECT_EQ(brownian_segment_max(1, 0, 0, 1, -1, rng), 1);
    constexpr int n = 1'000'000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
    {
        double m = brownian_segment_max(0, 0, 1, 1, 0, rng);
        ASSERT_GE(m, 0);
        hits += m > 1;
    }
    double p = std::exp(-2.0);
    double se = std::sqrt(p * (1 - p) / n);
    EXPECT_LT(std::abs(double(hits) / n - p), 4 * se);
}

TEST(LevyPath, ReducesToCompoundPoisson)
{
    constexpr int n = 100'000;
    auto jump = Distribution::pareto(1.5, 1).shifted(4);
    auto renewal = ProcessSpec::compound_poisson(jump, 1, 1.0);
    auto levy = ProcessSpec::jump_diffusion(0, 1.0, 1, jump);
    RandomStream ra(21);
    RandomStream rb(22);
    std::vector<double> ma;
    std::vector<double> mb;
    std::vector<double> xa;
    std::vector<double> xb;
    PathResult scratch;
    for (int i = 0; i < n; ++i)
    {
        auto a = ra.for_path(i);
        renewal_path_max(renewal, 10, a, scratch);
        ma.push_back(scratch.max);
        xa.push_back(scratch.terminal);
        auto b = rb.for_path(i);
        levy_path_max(levy, 10, b, scratch);
        mb.push_back(scratch.max);
        xb.push_back(scratch.terminal);
    }
    EXPECT_GT(ks_two_sample_p(ma, mb), 1e-3);
    EXPECT_GT(ks_two_sample_p(xa, xb), 1e-3);
}

TEST(LevyPath, BrownianFirstPassage)
{
    constexpr int n = 1'000'000;
    auto spec = ProcessSpec::jump_diffusion(1, -1, 0, Distribution::deterministic(0));
    struct Point
    {
        double x;
        double t;
    };
    for (auto [x, t] : {Point{0.5, 1}, Point{1, 4}, Point{2, 2}})
    {
        RandomStream base(31);
        PathResult scratch;
        int hits = 0;
        for (int i = 0; i < n; ++i)
        {
            auto rng = base.for_path(i);
            levy_path_max(spec, t, rng, scratch);
            hits += scratch.max > x;
        }
        double p = normal_tail((x + t) / std::sqrt(t))
                   + std::exp(-2 * x) * normal_tail((x - t) / std::sqrt(t));
        double se = std::sqrt(p * (1 - p) / n);
        EXPECT_LT(std::abs(double(hits) / n - p), 4 * se) << "x=" << x << " t=" << t;
    }
}

TEST(LevyPath, DeterministicDrift)
{
    RandomStream rng(1);
    auto spec = ProcessSpec::jump_diffusion(0, -1, 0, Distribution::deterministic(0));
    auto p = levy_path_max(spec, 5, rng);
    EXPECT_EQ(p.max, 0);
    EXPECT_EQ(p.terminal, -5);
    EXPECT_EQ(p.n_jumps, 0u);
}

TEST(StoppedSample, Examples)
{
    auto spec = heavy_poisson(0.5);
    RandomStream base(8);
    PathResult fixed;
    for (int i = 0; i < 100; ++i)
    {
        auto r1 = base.for_path(i);
        auto r2 = base.for_path(i);
        auto s = stopped_sample(spec, Distribution::deterministic(6), r1);
        simulate_path(spec, 6, r2, fixed);
        EXPECT_EQ(s.terminal, fixed.terminal);
        EXPECT_EQ(s.max, fixed.max);
        EXPECT_EQ(s.tau, 6);
    }

    auto still = ProcessSpec::jump_diffusion(0, 0, 0, Distribution::deterministic(0));
    auto rng = base.for_path(0);
    auto z = stopped_sample(still, Distribution::exponential(1), rng);
    EXPECT_EQ(z.terminal, 0);
    EXPECT_EQ(z.max, 0);
}

TEST(StoppedSample, WaldIdentity)
{
    constexpr int n = 1'000'000;
    auto spec = ProcessSpec::compound_poisson(Distribution::deterministic(1), 1, 0);
    auto tau = Distribution::exponential(1);
    RandomStream base(77);
    PathResult scratch;
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < n; ++i)
    {
        auto rng = base.for_path(i);
        double v = stopped_sample(spec, tau, rng, scratch).terminal;
        sum += v;
        sum_sq += v * v;
    }
    double mean = sum / n;
    double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - 1), 4 * se);
}

TEST(ExpectedJumpCount, Examples)
{
    auto y = Distribution::pareto(2, 1);
    auto pois = expected_jump_count(ProcessSpec::compound_poisson(y, 2, 0), 3, 0, 1);
    EXPECT_TRUE(pois.exact);
    EXPECT_DOUBLE_EQ(pois.value, 6);
    auto det = expected_jump_count(
        ProcessSpec::compound_renewal(y, Distribution::deterministic(1), 0), 3.5, 0, 1);
    EXPECT_TRUE(det.exact);
    EXPECT_EQ(det.value, 3);

    auto weib = ProcessSpec::compound_renewal(y, Distribution::weibull(0.5, 1), 0);
    auto e1 = expected_jump_count(weib, 10, 100'000, 1);
    auto e2 = expected_jump_count(weib, 10, 100'000, 2);
    EXPECT_FALSE(e1.exact);
    EXPECT_GT(e1.std_error, 0);
    double joint = std::sqrt(e1.std_error * e1.std_error + e2.std_error * e2.std_error);
    EXPECT_LT(std::abs(e1.value - e2.value), 4 * joint);
    // elementary renewal band: lambda t = 5, and the renewal function of a
    // decreasing-failure-rate law lies above lambda t - 1
    EXPECT_GT(e1.value, 4);
    EXPECT_LT(e1.value, 8);
}

TEST(ExpectedJumpCount, WorkerCountDoesNotMatter)
{
    auto weib = ProcessSpec::compound_renewal(
        Distribution::pareto(2, 1), Distribution::weibull(0.5, 1), 0);
    auto a = expected_jump_count(weib, 10, 20'000, 9, 1);
    auto b = expected_jump_count(weib, 10, 20'000, 9, 3);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(PathInvariants, MaxDominatesZeroAndTerminal)
{
    std::vector<ProcessSpec> specs{
        ProcessSpec::random_walk(Distribution::pareto(1.5, 1).shifted(4)),
        heavy_poisson(-0.5),
        heavy_poisson(2),
        ProcessSpec::compound_renewal(
            Distribution::lognormal(0, 1).shifted(3), Distribution::weibull(0.5, 1), 0.7),
        ProcessSpec::jump_diffusion(1, -4, 1, Distribution::pareto(1.5, 1)),
        ProcessSpec::jump_diffusion(0.5, 1, 2, Distribution::weibull(0.5, 1).shifted(4))};
    for (auto const& spec : specs)
    {
        RandomStream base(4);
        PathResult p;
        for (int i = 0; i < 2000; ++i)
        {
            auto rng = base.for_path(i);
            simulate_path(spec, 25, rng, p);
            ASSERT_GE(p.max, 0) << spec.describe();
            ASSERT_GE(p.max, p.terminal) << spec.describe();
        }
    }
}

TEST(PathInvariants, HorizonExtensionNeverLowersMax)
{
    std::vector<ProcessSpec> specs{
        ProcessSpec::random_walk(Distribution::pareto(1.5, 1).shifted(4)),
        heavy_poisson(-0.5),
        heavy_poisson(2)};
    for (auto const& spec : specs)
    {
        RandomStream base(6);
        PathResult shorter;
        PathResult longer;
        for (int i = 0; i < 2000; ++i)
        {
            auto r1 = base.for_path(i);
            auto r2 = base.for_path(i);
            simulate_path(spec, 10, r1, shorter);
            simulate_path(spec, 30, r2, longer);
            ASSERT_LE(shorter.max, longer.max) << spec.describe();
        }
    }
}

TEST(PathInvariants, NonpositiveIngredientsGiveZeroMax)
{
    std::vector<ProcessSpec> specs{
        ProcessSpec::random_walk(Distribution::deterministic(-2)),
        ProcessSpec::compound_poisson(Distribution::deterministic(-1), 2, -1),
        ProcessSpec::compound_renewal(
            Distribution::deterministic(0), Distribution::weibull(0.5, 1), 0),
        ProcessSpec::jump_diffusion(0, -2, 1, Distribution::deterministic(-0.5))};
    for (auto const& spec : specs)
    {
        RandomStream base(2);
        PathResult p;
        for (int i = 0; i < 500; ++i)
        {
            auto rng = base.for_path(i);
            simulate_path(spec, 20, rng, p);
            ASSERT_EQ(p.max, 0) << spec.describe();
        }
    }
}

TEST(PathInvariants, CompoundPoissonTerminalMean)
{
    constexpr int n = 1'000'000;
    auto jump = Distribution::pareto(3.5, 1);
    double rate = 2;
    double c = -3;
    double t = 5;
    auto spec = ProcessSpec::compound_poisson(jump, rate, c);
    RandomStream base(17);
    PathResult p;
    double sum = 0;
    double sum_sq = 0;
    for (int i = 0; i < n; ++i)
    {
        auto rng = base.for_path(i);
        renewal_path_max(spec, t, rng, p);
        sum += p.terminal;
        sum_sq += p.terminal * p.terminal;
    }
    double mean = sum / n;
    double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - t * (rate * jump.mean() + c)), 4 * se);
}

TEST(PathInvariants, Reproducible)
{
    auto spec = ProcessSpec::jump_diffusion(1, -4, 1, Distribution::pareto(1.5, 1));
    RandomStream a(123);
    RandomStream b(123);
    for (int i = 0; i < 100; ++i)
    {
        auto ra = a.for_path(i);
        auto rb = b.for_path(i);
        auto pa = levy_path_max(spec, 50, ra);
        auto pb = levy_path_max(spec, 50, rb);
        ASSERT_EQ(pa.max, pb.max);
        ASSERT_EQ(pa.terminal, pb.terminal);
        ASSERT_EQ(pa.n_jumps, pb.n_jumps);
        ASSERT_EQ(pa.jumps.size(), pb.jumps.size());
        for (std::size_t k = 0; k < pa.jumps.size(); ++k)
        {
            ASSERT_EQ(pa.jumps[k].time, pb.jumps[k].time);
            ASSERT_EQ(pa.jumps[k].size, pb.jumps[k].size);
        }
    }
}
