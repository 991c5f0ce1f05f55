#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bigjump/montecarlo.hpp"

using namespace bigjump;

namespace
{
double normal_tail(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

bool within(MCEstimate const& e, double p, double k = 4)
{
    double se = std::sqrt(p * (1 - p) / static_cast<double>(e.n_paths));
    return std::abs(e.p_hat - p) <= k * se;
}

BigJumpParams unit_params(double A = 1)
{
    BigJumpParams p;
    p.epsilon = 0.1;
    p.A = A;
    p.drift_rate = -1;
    p.lambda = 1;
    return p;
}

PathResult path_with(std::vector<JumpRecord> jumps, double horizon)
{
    PathResult p;
    p.horizon = horizon;
    p.jumps = std::move(jumps);
    p.n_jumps = p.jumps.size();
    return p;
}

AsymptoticEstimate point(double x, double t, double value, unsigned flags = 0)
{
    AsymptoticEstimate a;
    a.formula = FormulaId::rw_finite;
    a.x = x;
    a.t = t;
    a.value = value;
    a.flags = flags;
    return a;
}
}  // namespace

TEST(MCEstimate, Invariants)
{
    for (auto [h, n] : {std::pair<std::uint64_t, std::uint64_t>{0, 10},
                        {10, 10},
                        {37, 1000},
                        {1, 1000000}})
    {
        auto e = MCEstimate::from_hits(h, n, 5);
        EXPECT_EQ(e.hits, h);
        EXPECT_DOUBLE_EQ(e.p_hat * n, double(h));
        EXPECT_DOUBLE_EQ(e.std_error, std::sqrt(e.p_hat * (1 - e.p_hat) / n));
        EXPECT_GE(e.ci_lo, 0);
        EXPECT_LE(e.ci_hi, 1);
        EXPECT_LE(e.ci_lo, e.p_hat);
        EXPECT_GE(e.ci_hi, e.p_hat);
    }
    EXPECT_TRUE(MCEstimate::from_hits(9, 100, 0).low_hits());
    EXPECT_FALSE(MCEstimate::from_hits(10, 100, 0).low_hits());
    EXPECT_THROW(MCEstimate::from_hits(0, 0, 0), InvalidParameter);
}

TEST(Exceedance, Examples)
{
    auto flat = ProcessSpec::compound_poisson(Distribution::deterministic(-1), 1, -0.5);
    auto zero = estimate_exceedance(flat, 10, 0.5, 10'000, 1, Statistic::max);
    EXPECT_EQ(zero.p_hat, 0.0);
    EXPECT_EQ(zero.hits, 0u);

    for (double lambda : {0.3, 1.0, 2.5})
    {
        auto spec = ProcessSpec::compound_poisson(Distribution::deterministic(1), lambda, 0);
        auto e = estimate_exceedance(spec, 1, 0.5, 100'000, 2, Statistic::max);
        EXPECT_TRUE(within(e, 1 - std::exp(-lambda))) << lambda << " " << e.p_hat;
    }

    auto brownian = ProcessSpec::jump_diffusion(1, -1, 0, Distribution::deterministic(0));
    auto b = estimate_exceedance(brownian, 1, 1, 1'000'000, 3, Statistic::max);
    double exact = normal_tail(2) + std::exp(-2.0) * normal_tail(0);
    EXPECT_NEAR(exact, 0.0904, 1e-4);
    EXPECT_TRUE(within(b, exact)) << b.p_hat;
}

TEST(Exceedance, MaxDominatesTerminalAndDecreasesInX)
{
    std::vector<ProcessSpec> specs{
        ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0),
        ProcessSpec::compound_renewal(
            Distribution::weibull(0.5, 1).shifted(3), Distribution::weibull(2, 1), 0.4),
        ProcessSpec::jump_diffusion(1, -4, 1, Distribution::pareto(1.5, 1)),
        ProcessSpec::random_walk(Distribution::lognormal(0, 1).shifted(2.5))};
    std::vector<double> xs{-1, 0, 0.5, 2, 5, 20, 100};
    for (auto const& spec : specs)
    {
        auto grid = estimate_exceedance_grid(spec, 20, xs, 20'000, 8);
        for (std::size_t j = 0; j < xs.size(); ++j)
        {
            EXPECT_GE(grid.max[j].hits, grid.terminal[j].hits) << spec.describe();
            if (j > 0)
            {
                EXPECT_LE(grid.max[j].hits, grid.max[j - 1].hits);
                EXPECT_LE(grid.terminal[j].hits, grid.terminal[j - 1].hits);
            }
        }
        // M_t >= 0 so every path exceeds a negative level
        EXPECT_EQ(grid.max[0].hits, 20'000u);
    }
}

TEST(Exceedance, IndependentOfWorkerCount)
{
    auto spec = ProcessSpec::jump_diffusion(1, -4, 1, Distribution::pareto(1.5, 1));
    std::vector<double> xs{1, 10, 50};
    auto one = estimate_exceedance_grid(spec, 10, xs, 30'000, 4, 1);
    auto three = estimate_exceedance_grid(spec, 10, xs, 30'000, 4, 3);
    for (std::size_t j = 0; j < xs.size(); ++j)
    {
        EXPECT_EQ(one.max[j].hits, three.max[j].hits);
        EXPECT_EQ(one.terminal[j].hits, three.terminal[j].hits);
    }
}

TEST(Exceedance, DisjointSeedsHaveOverlappingIntervals)
{
    auto spec = ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0);
    int overlapping = 0;
    for (std::uint64_t rep = 0; rep < 20; ++rep)
    {
        auto a = estimate_exceedance(spec, 10, 15, 5'000, 1000 + 2 * rep, Statistic::max);
        auto b = estimate_exceedance(spec, 10, 15, 5'000, 1001 + 2 * rep, Statistic::max);
        overlapping += a.ci_lo <= b.ci_hi && b.ci_lo <= a.ci_hi;
    }
    // two 95% intervals of independent estimates overlap with probability
    // about 0.994
    EXPECT_GE(overlapping, 17);
}

TEST(StoppedExceedance, DeterministicTimeMatchesFixedHorizon)
{
    auto spec = ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0);
    std::vector<double> xs{1, 10};
    auto stopped = estimate_stopped_exceedance_grid(
        spec, Distribution::deterministic(10), xs, 10'000, 6);
    auto fixed = estimate_exceedance_grid(spec, 10, xs, 10'000, 6);
    for (std::size_t j = 0; j < xs.size(); ++j)
    {
        EXPECT_EQ(stopped.max[j].hits, fixed.max[j].hits);
        EXPECT_EQ(stopped.terminal[j].hits, fixed.terminal[j].hits);
    }
}

TEST(BigJump, DetectionExamples)
{
    double x = 50;
    auto params = unit_params();
    // X_s = -s up to T_1 = 2, then a jump of x + |r| T_1 + 1
    auto hit = path_with({{2, x + 2 + 1, -2, 0}}, 10);
    auto d = detect_big_jump(hit, x, params);
    EXPECT_TRUE(d.occurred);
    ASSERT_TRUE(d.k.has_value());
    EXPECT_EQ(*d.k, 1u);

    auto small = path_with({{2, 3, -2, 0}, {4, 5, -1, 1}}, 10);
    auto none = detect_big_jump(small, x, params);
    EXPECT_FALSE(none.occurred);
    EXPECT_FALSE(none.k.has_value());

    // a drop to -6 at s = 1 leaves the band before the big jump at s = 3
    auto broken = path_with({{1, -5, -1, 0}, {3, x + 100, -8, -6}}, 10);
    EXPECT_FALSE(detect_big_jump(broken, x, params).occurred);
    // a wide enough band lets the same jump count
    auto wide = detect_big_jump(broken, x, unit_params(10));
    EXPECT_TRUE(wide.occurred);
    EXPECT_EQ(*wide.k, 2u);
}

TEST(BigJump, LowerBound)
{
    EXPECT_NEAR(unit_params().lower_bound(), 1 / 1.2, 1e-15);
    auto loose = unit_params();
    loose.epsilon = 1e9;
    EXPECT_LT(loose.lower_bound(), 1e-8);
    EXPECT_GE(loose.lower_bound(), 0);
    auto bad = unit_params();
    bad.A = 0;
    EXPECT_THROW(bad.validate(), InvalidParameter);
}

TEST(BigJump, MonotoneInBandWidth)
{
    std::vector<ProcessSpec> specs{
        ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0),
        ProcessSpec::compound_renewal(
            Distribution::pareto(1.5, 1).shifted(3), Distribution::weibull(2, 1), -0.2),
        ProcessSpec::jump_diffusion(1, -4, 1, Distribution::pareto(1.5, 1))};
    for (auto const& spec : specs)
    {
        auto params = default_big_jump_params(spec);
        RandomStream base(12);
        PathResult path;
        for (int i = 0; i < 3000; ++i)
        {
            auto rng = base.for_path(i);
            simulate_path(spec, 50, rng, path, true);
            bool prev = false;
            for (double A : {0.5, 2.0, 8.0, 32.0, 128.0})
            {
                params.A = A;
                bool now = detect_big_jump(path, 5, params).occurred;
                ASSERT_TRUE(now || !prev) << spec.describe() << " path " << i;
                prev = now;
            }
        }
    }
}

TEST(BigJump, RequiredBandIsTight)
{
    auto spec = ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0);
    RandomStream base(13);
    PathResult path;
    for (int i = 0; i < 500; ++i)
    {
        auto rng = base.for_path(i);
        simulate_path(spec, 30, rng, path, true);
        double need = required_band(path, 0.1, -1);
        // a jump that is big at every level makes detection a pure band check
        auto probe = path;
        probe.jumps.push_back({30, 1e300, path.terminal, path.final_segment_max});
        auto params = unit_params(need + 1e-9);
        EXPECT_TRUE(detect_big_jump(probe, 0, params).occurred || need <= 0);
    }
}

TEST(BigJump, ConditionalProbability)
{
    auto spec = ProcessSpec::compound_poisson(Distribution::pareto(1.5, 1).shifted(4), 1, 0);
    auto params = default_big_jump_params(spec);
    EXPECT_DOUBLE_EQ(params.epsilon, 0.1);
    params.A = calibrate_band(spec, 50, params.epsilon, params.drift_rate, 5'000, 3);
    EXPECT_GT(params.A, 1);
    auto est = conditional_big_jump_prob(spec, 50, 100, params, 20'000, 4);
    EXPECT_GT(est.exceedance.hits, 100u);
    EXPECT_EQ(est.conditional.n_paths, est.exceedance.hits);
    EXPECT_NEAR(est.lower_bound, 1 / 1.2, 1e-15);
    EXPECT_GE(est.conditional.ci_hi, est.lower_bound - 0.05);

    auto flat = ProcessSpec::compound_poisson(Distribution::deterministic(-1), 1, 0);
    EXPECT_THROW(conditional_big_jump_prob(flat, 10, 1, unit_params(), 1'000, 1),
                 InsufficientHits);
    auto up = ProcessSpec::compound_poisson(Distribution::pareto(2, 1), 1, 0);
    EXPECT_THROW(conditional_big_jump_prob(up, 10, 1, unit_params(), 1'000, 1),
                 PreconditionViolated);
}

TEST(CompareReport, Examples)
{
    std::vector<AsymptoticEstimate> asym{point(10, 5, 0.01), point(20, 5, 0.005)};
    std::vector<MCPoint> mc{{10, 5, MCEstimate::from_hits(1000, 100'000, 1)},
                            {20, 5, MCEstimate::from_hits(500, 100'000, 1)}};
    auto table = compare_report(asym, mc);
    ASSERT_EQ(table.rows.size(), 2u);
    for (auto const& row : table.rows)
    {
        EXPECT_DOUBLE_EQ(row.ratio, 1.0);
        EXPECT_EQ(row.formula_id, "RW_FINITE");
    }
    ASSERT_TRUE(table.verdict.has_value());
    EXPECT_TRUE(*table.verdict);

    // the flagged point would fail, but it is excluded
    asym[1].flags = pre_asymptotic;
    asym[1].value = 0.5;
    auto excluded = compare_report(asym, mc);
    EXPECT_EQ(excluded.eligible, 1u);
    EXPECT_TRUE(excluded.verdict.value_or(false));
    asym[1].flags = 0;
    EXPECT_FALSE(compare_report(asym, mc).verdict.value_or(true));

    // no jumps: the formula is out of scope and no verdict is given
    auto brownian = ProcessSpec::jump_diffusion(1, -1, 0, Distribution::deterministic(0));
    auto oos = levy_tail(brownian, 1, 1);
    auto none = compare_report({oos}, {{1, 1, MCEstimate::from_hits(904, 10'000, 1)}});
    EXPECT_FALSE(none.verdict.has_value());
    EXPECT_TRUE(std::isnan(none.rows[0].ratio));
    EXPECT_TRUE(none.rows[0].flags & out_of_scope);

    EXPECT_THROW(compare_report(asym, {mc[0]}), MisalignedGrids);
    mc[1].x = 21;
    EXPECT_THROW(compare_report(asym, mc), MisalignedGrids);
}

TEST(CompareReport, LowHitsAreExcluded)
{
    auto table = compare_report({point(10, 5, 0.01)},
                                {{10, 5, MCEstimate::from_hits(3, 100'000, 1)}});
    EXPECT_TRUE(table.rows[0].flags & low_hits);
    EXPECT_FALSE(table.verdict.has_value());
}
