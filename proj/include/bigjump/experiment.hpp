#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "config.hpp"
#include "montecarlo.hpp"
#include "simulate.hpp"
#include "tailmath.hpp"

namespace bigjump
{
//---------------------------------------------------------------------------//
//! One row of a tail-class diagnostic.
struct DiagnosticRow
{
    std::string diagnostic;
    double x = 0;
    double ratio = 0;
    double error_bound = 0;
    bool verdict = false;
};

struct ExperimentReport
{
    ExperimentConfig config;
    //! Formula vs Monte Carlo rows (every scenario except tails).
    std::vector<ComparisonRow> rows;
    //! Tail diagnostics (tails scenario).
    std::vector<DiagnosticRow> diagnostics;
    //! Named verdicts; a null optional means no eligible point.
    std::vector<std::pair<std::string, std::optional<bool>>> verdicts;
    //! Resolved run-time quantities such as E N_t or a calibrated band.
    Json resolved = Json::object();
    double wall_clock = 0;

    //! False if any verdict failed.
    bool passed() const
    {
        for (auto const& [name, v] : verdicts)
        {
            if (v && !*v)
            {
                return false;
            }
        }
        return true;
    }
};

namespace detail
{
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt)
{
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline unsigned workers_of(ExperimentConfig const& c)
{
    return c.workers ? c.workers : default_workers();
}

inline std::string label(char const* what, double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s t=%.10g", what, t);
    return buf;
}

/*!
 * Shared driver for the formula-vs-simulation scenarios: for each horizon,
 * simulate once on the x grid and compare with the formula point by point.
 */
inline void compare_on_grid(
    ExperimentConfig const& c,
    ExperimentReport& report,
    ProcessSpec const& sim,
    std::function<AsymptoticEstimate(double x, double t)> const& formula)
{
    auto const& th = c.thresholds;
    for (double t : c.t_grid)
    {
        double horizon = std::isinf(t) ? *c.mc_horizon : t;
        auto grid = estimate_exceedance_grid(
            sim, horizon, c.x_grid, c.n_paths, c.seed, workers_of(c));
        std::vector<AsymptoticEstimate> asym;
        std::vector<MCPoint> mc;
        for (std::size_t j = 0; j < c.x_grid.size(); ++j)
        {
            asym.push_back(formula(c.x_grid[j], t));
            asym.back().x = c.x_grid[j];
            asym.back().t = t;
            mc.push_back({c.x_grid[j], t, grid.max[j]});
        }
        auto table = compare_report(asym, mc, th.band_lo, th.band_hi, th.pass_fraction);
        report.rows.insert(report.rows.end(), table.rows.begin(), table.rows.end());
        report.verdicts.emplace_back(label("ratio band", t), table.verdict);
    }
}

inline MeanEstimate renewal_count(ExperimentConfig const& c,
                                  ProcessSpec const& spec,
                                  double t,
                                  ExperimentReport& report)
{
    auto ent = expected_jump_count(spec, t, c.ent_paths, sub_seed(c.seed, 1), workers_of(c));
    report.resolved["ENt"].push_back(
        {{"t", t}, {"value", ent.value}, {"stderr", ent.std_error}, {"exact", ent.exact}});
    return ent;
}

inline void run_tails(ExperimentConfig const& c, ExperimentReport& report)
{
    auto const& d = *c.distribution;
    auto const& th = c.thresholds;
    auto add = [&](char const* name, double x, RatioValue r, double limit, double tol) {
        bool ok = std::abs(r.ratio - limit) < tol;
        report.diagnostics.push_back({name, x, r.ratio, r.error_bound, ok});
    };
    for (double x : c.x_grid)
    {
        add("convolution", x, convolution_tail_ratio(d, x), 2, th.ratio_tol);
    }
    report.verdicts.emplace_back("convolution ratio near 2 at largest x",
                                 report.diagnostics.back().verdict);
    if (d.has_finite_mean())
    {
        for (double x : c.x_grid)
        {
            add("sstar", x, sstar_ratio(d, x), 1, th.ratio_tol);
        }
        report.verdicts.emplace_back("S* ratio near 1 at largest x",
                                     report.diagnostics.back().verdict);
    }
    if (c.light)
    {
        for (double x : c.x_grid)
        {
            add("light_long", x, light_long_convolution_ratio(*c.light, d, x), 1,
                th.light_long_tol);
        }
        report.verdicts.emplace_back("light-long ratio near 1 at largest x",
                                     report.diagnostics.back().verdict);
    }
    if (c.tau)
    {
        auto r = check_small_tau_condition(*c.tau, *c.tau_c, d, c.x_grid);
        for (auto const& row : r.rows)
        {
            report.diagnostics.push_back({"small_tau", row.x, row.ratio, 0, r.passed});
        }
        report.verdicts.emplace_back("small interarrival tail condition", r.passed);
    }
}

inline void run_stopped(ExperimentConfig const& c, ExperimentReport& report)
{
    auto const& spec = *c.process;
    auto const& tau = *c.tau;
    auto const& th = c.thresholds;
    TailKernel kernel{spec.jump_law.positive_part(), spec.intensity()};
    double a = spec.per_time_drift();
    auto grid = estimate_stopped_exceedance_grid(
        spec, tau, c.x_grid, c.n_paths, c.seed, workers_of(c));
    auto run_mode = [&](StoppedMode mode, char const* name) {
        std::vector<AsymptoticEstimate> asym;
        std::vector<MCPoint> mc;
        for (std::size_t j = 0; j < c.x_grid.size(); ++j)
        {
            asym.push_back(stopped_tail(kernel, a, tau, c.x_grid[j], mode));
            mc.push_back({c.x_grid[j], asym.back().t, grid.max[j]});
        }
        auto table = compare_report(asym, mc, th.band_lo, th.band_hi, th.pass_fraction);
        report.rows.insert(report.rows.end(), table.rows.begin(), table.rows.end());
        report.verdicts.emplace_back(name, table.verdict);
    };
    if (c.stopped_mode != "mean")
    {
        run_mode(StoppedMode::general, "ratio band general form");
    }
    if (c.stopped_mode != "general")
    {
        run_mode(StoppedMode::mean, "ratio band mean form");
    }
}

inline void run_bigjump(ExperimentConfig const& c, ExperimentReport& report)
{
    auto const& spec = *c.process;
    auto const& th = c.thresholds;
    auto params = default_big_jump_params(spec);
    if (c.bigjump.epsilon)
    {
        params.epsilon = *c.bigjump.epsilon;
    }
    for (double t : c.t_grid)
    {
        if (c.bigjump.A)
        {
            params.A = *c.bigjump.A;
        }
        else
        {
            params.A = calibrate_band(spec, t, params.epsilon, params.drift_rate,
                                      c.bigjump.calibration_paths, c.seed,
                                      c.bigjump.calibration_quantile);
        }
        params.validate();
        report.resolved["bigjump"].push_back({{"t", t},
                                              {"epsilon", params.epsilon},
                                              {"A", params.A},
                                              {"drift_rate", params.drift_rate},
                                              {"lambda", params.lambda},
                                              {"lower_bound", params.lower_bound()}});
        std::size_t eligible = 0;
        std::size_t passing = 0;
        for (double x : c.x_grid)
        {
            ComparisonRow row;
            row.x = x;
            row.t = t;
            row.formula_id = "BIG_JUMP_BOUND";
            row.asym_value = params.lower_bound();
            try
            {
                auto est = conditional_big_jump_prob(spec, t, x, params, c.n_paths, c.seed,
                                                     workers_of(c));
                auto const& e = est.conditional;
                row.p_hat = e.p_hat;
                row.std_error = e.std_error;
                row.ratio = e.p_hat / row.asym_value;
                row.ratio_ci_lo = e.ci_lo / row.asym_value;
                row.ratio_ci_hi = e.ci_hi / row.asym_value;
                if (e.n_paths < th.min_conditioning_hits)
                {
                    row.flags |= low_hits;
                }
            }
            catch (InsufficientHits const&)
            {
                row.ratio = row.ratio_ci_lo = row.ratio_ci_hi
                    = std::numeric_limits<double>::quiet_NaN();
                row.flags |= low_hits;
            }
            if (!(row.flags & verdict_excluding_flags))
            {
                ++eligible;
                passing += row.p_hat >= row.asym_value - th.bigjump_slack;
            }
            report.rows.push_back(row);
        }
        std::optional<bool> v;
        if (eligible)
        {
            v = passing >= th.pass_fraction * static_cast<double>(eligible);
        }
        report.verdicts.emplace_back(label("estimate above bound minus slack", t), v);
    }
}

inline void run_willekens(ExperimentConfig const& c, ExperimentReport& report)
{
    auto const& spec = *c.process;
    auto const& th = c.thresholds;
    for (double t : c.t_grid)
    {
        auto grid = estimate_exceedance_grid(
            spec, t, c.x_grid, c.n_paths, c.seed, workers_of(c));
        std::vector<std::size_t> eligible;
        for (std::size_t j = 0; j < c.x_grid.size(); ++j)
        {
            ComparisonRow row;
            row.x = c.x_grid[j];
            row.t = t;
            row.formula_id = to_string(FormulaId::fixed_t_equiv);
            row.asym_value = grid.terminal[j].p_hat;
            row.p_hat = grid.max[j].p_hat;
            row.std_error = grid.max[j].std_error;
            if (grid.terminal[j].hits == 0)
            {
                row.ratio = row.ratio_ci_lo = row.ratio_ci_hi
                    = std::numeric_limits<double>::quiet_NaN();
                row.flags |= low_hits;
            }
            else
            {
                auto r = fixed_t_equivalence_ratio(grid.max[j], grid.terminal[j],
                                                   th.pre_asymptotic_p);
                row.ratio = r.ratio;
                row.ratio_ci_lo = r.ci_lo;
                row.ratio_ci_hi = r.ci_hi;
                if (r.pre_asymptotic)
                {
                    row.flags |= pre_asymptotic;
                }
                if (grid.terminal[j].hits < th.min_equivalence_hits)
                {
                    row.flags |= low_hits;
                }
            }
            if (!(row.flags & verdict_excluding_flags))
            {
                eligible.push_back(report.rows.size());
            }
            report.rows.push_back(row);
        }
        std::optional<bool> v;
        if (!eligible.empty())
        {
            std::size_t first = eligible.size() > th.equivalence_points
                                    ? eligible.size() - th.equivalence_points
                                    : 0;
            v = true;
            for (std::size_t k = first; k < eligible.size(); ++k)
            {
                auto const& row = report.rows[eligible[k]];
                v = *v && row.ratio_ci_lo <= 1 && row.ratio_ci_hi >= 1;
            }
        }
        report.verdicts.emplace_back(label("interval contains 1 at largest x", t), v);
    }
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Execute a scenario. Precondition violations of the formulas surface as
 * PreconditionViolated naming the failing condition.
 */
inline ExperimentReport run_experiment(ExperimentConfig const& c)
{
    auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.config = c;
    auto const& s = c.scenario;
    if (s == "tails")
    {
        detail::run_tails(c, report);
    }
    else if (s == "rw")
    {
        auto const& spec = *c.process;
        double b = spec.jump_law.mean();
        report.resolved["b"] = b;
        detail::compare_on_grid(c, report, spec, [&](double x, double t) {
            return std::isinf(t)
                       ? rw_max_global(spec.jump_law, b, x)
                       : rw_max_finite(spec.jump_law, b, static_cast<std::uint64_t>(t), x);
        });
    }
    else if (s == "renewal")
    {
        auto const& spec = *c.process;
        report.resolved["a"] = spec.per_jump_drift();
        std::map<double, MeanEstimate> ent;
        for (double t : c.t_grid)
        {
            if (!std::isinf(t))
            {
                ent[t] = detail::renewal_count(c, spec, t, report);
            }
        }
        detail::compare_on_grid(c, report, spec, [&](double x, double t) {
            return std::isinf(t)
                       ? renewal_infty_with_tau(spec, x)
                       : renewal_finite(spec, t, x, ent[t].value, ent[t].std_error);
        });
    }
    else if (s == "levy")
    {
        auto const& spec = *c.process;
        report.resolved["a"] = spec.per_time_drift();
        detail::compare_on_grid(
            c, report, spec, [&](double x, double t) { return levy_tail(spec, t, x); });
    }
    else if (s == "stopped")
    {
        detail::run_stopped(c, report);
    }
    else if (s == "bigjump")
    {
        detail::run_bigjump(c, report);
    }
    else if (s == "ruin")
    {
        auto const& r = *c.ruin;
        // the surplus deficit: claims minus premium income
        auto spec = ProcessSpec::compound_renewal(r.claims, r.interarrival, -r.premium);
        std::map<double, MeanEstimate> ent;
        for (double t : c.t_grid)
        {
            if (!std::isinf(t))
            {
                ent[t] = detail::renewal_count(c, spec, t, report);
            }
        }
        detail::compare_on_grid(c, report, spec, [&](double u, double t) {
            if (std::isinf(t))
            {
                return ruin_approx(r.claims, r.premium, r.interarrival, u, t);
            }
            return ruin_approx(r.claims, r.premium, r.interarrival, u, t, ent[t].value,
                               ent[t].std_error);
        });
    }
    else if (s == "willekens")
    {
        detail::run_willekens(c, report);
    }
    else
    {
        throw SchemaError("unknown scenario '" + s + "'");
    }
    report.wall_clock
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

/*!
 * Evaluate the scenario's formula at the first grid point so that theorem
 * preconditions fail before any simulation is spent.
 */
inline void check_preconditions(ExperimentConfig const& c)
{
    double x = c.x_grid.front();
    double t = c.t_grid.empty() ? 1.0 : c.t_grid.front();
    auto const& s = c.scenario;
    if (s == "rw")
    {
        rw_max_global(c.process->jump_law, c.process->jump_law.mean(), x);
    }
    else if (s == "renewal")
    {
        renewal_finite(*c.process, 1, x, 1);
    }
    else if (s == "levy")
    {
        levy_tail(*c.process, t, x);
    }
    else if (s == "stopped")
    {
        TailKernel kernel{c.process->jump_law.positive_part(), c.process->intensity()};
        double a = c.process->per_time_drift();
        if (c.stopped_mode != "mean")
            stopped_tail(kernel, a, *c.tau, x, StoppedMode::general);
        if (c.stopped_mode != "general")
            stopped_tail(kernel, a, *c.tau, x, StoppedMode::mean);
    }
    else if (s == "bigjump")
    {
        detail::require_negative(c.process->per_time_drift(), "mean drift");
    }
    else if (s == "ruin")
    {
        ruin_approx(c.ruin->claims, c.ruin->premium, c.ruin->interarrival, x, infinity);
    }
    else if (s == "tails")
    {
        if (c.tau && !(*c.tau_c > 0))
        {
            throw InvalidParameter("tau_c must be positive");
        }
    }
}

//---------------------------------------------------------------------------//
//! %.10g with inf and nan spelled out.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline constexpr char const* comparison_header
    = "x,t,formula_id,asym_value,p_hat,stderr,ratio,ratio_ci_lo,ratio_ci_hi,flags";
inline constexpr char const* diagnostic_header = "diagnostic,x,ratio,error_bound,verdict";

inline std::string csv_body(ExperimentReport const& r)
{
    std::string out;
    bool const tails = r.config.scenario == "tails";
    out += tails ? diagnostic_header : comparison_header;
    out += '\n';
    auto f = format_number;
    if (tails)
    {
        for (auto const& d : r.diagnostics)
        {
            out += d.diagnostic + ',' + f(d.x) + ',' + f(d.ratio) + ',' + f(d.error_bound)
                   + ',' + (d.verdict ? "pass" : "fail") + '\n';
        }
        return out;
    }
    for (auto const& row : r.rows)
    {
        out += f(row.x) + ',' + f(row.t) + ',' + row.formula_id + ',' + f(row.asym_value)
               + ',' + f(row.p_hat) + ',' + f(row.std_error) + ',' + f(row.ratio) + ','
               + f(row.ratio_ci_lo) + ',' + f(row.ratio_ci_hi) + ','
               + flags_to_string(row.flags) + '\n';
    }
    return out;
}

inline Json report_json(ExperimentReport const& r, bool with_rows)
{
    Json j;
    j["version"] = library_version;
    j["seed"] = r.config.seed;
    j["config"] = r.config.echo();
    Json verdicts = Json::array();
    for (auto const& [name, v] : r.verdicts)
    {
        verdicts.push_back({{"name", name}, {"verdict", v ? Json(*v ? "pass" : "fail") : Json()}});
    }
    j["verdicts"] = verdicts;
    j["passed"] = r.passed();
    j["resolved"] = r.resolved;
    j["wall_clock_seconds"] = r.wall_clock;
    if (with_rows)
    {
        auto f = [](double v) { return Json(format_number(v)); };
        Json rows = Json::array();
        for (auto const& row : r.rows)
        {
            rows.push_back({{"x", f(row.x)},
                            {"t", f(row.t)},
                            {"formula_id", row.formula_id},
                            {"asym_value", f(row.asym_value)},
                            {"p_hat", f(row.p_hat)},
                            {"stderr", f(row.std_error)},
                            {"ratio", f(row.ratio)},
                            {"ratio_ci_lo", f(row.ratio_ci_lo)},
                            {"ratio_ci_hi", f(row.ratio_ci_hi)},
                            {"flags", flags_to_string(row.flags)}});
        }
        for (auto const& d : r.diagnostics)
        {
            rows.push_back({{"diagnostic", d.diagnostic},
                            {"x", f(d.x)},
                            {"ratio", f(d.ratio)},
                            {"error_bound", f(d.error_bound)},
                            {"verdict", d.verdict ? "pass" : "fail"}});
        }
        j["rows"] = rows;
    }
    return j;
}

/*!
 * Write the report into \c dir. CSV output gives <name>.csv plus a
 * <name>.json sidecar; JSON output gives <name>.json with the rows inline.
 * Returns the written paths.
 */
inline std::vector<std::filesystem::path> emit_report(ExperimentReport const& r,
                                                      std::filesystem::path const& dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
    {
        throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    std::string name = r.config.output.name.empty() ? r.config.scenario : r.config.output.name;
    auto write = [](fs::path const& p, std::string const& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out)
        {
            throw Error("cannot write '" + p.string() + "'");
        }
    };
    std::vector<fs::path> written;
    bool const csv = r.config.output.format == "csv";
    if (csv)
    {
        written.push_back(dir / (name + ".csv"));
        write(written.back(), csv_body(r));
    }
    written.push_back(dir / (name + ".json"));
    write(written.back(), report_json(r, !csv).dump(2) + "\n");
    return written;
}

}  // namespace bigjump
