#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dist.hpp"
#include "errors.hpp"
#include "process.hpp"

namespace bigjump
{
using Json = nlohmann::ordered_json;

inline constexpr char const* library_version = "0.1.0";

//! Scenario names understood by the experiment runner.
inline std::vector<std::string> const& scenario_names()
{
    static std::vector<std::string> const names{
        "tails", "rw", "renewal", "levy", "stopped", "bigjump", "ruin", "willekens"};
    return names;
}

inline char const* scenario_summary(std::string const& name)
{
    if (name == "tails")
        return "convolution, S* and light-long ratios of one tail; optional small-tau check";
    if (name == "rw")
        return "random-walk maximum over n steps vs the integrated-tail window";
    if (name == "renewal")
        return "compound renewal process with linear drift, finite or infinite horizon";
    if (name == "levy")
        return "jump diffusion maximum vs the Levy-tail window";
    if (name == "stopped")
        return "maximum at an independent random time, general and mean forms";
    if (name == "bigjump")
        return "probability of a single big jump given a high maximum";
    if (name == "ruin")
        return "ruin probability in the renewal risk model";
    if (name == "willekens")
        return "P{M_t > x} / P{X_t > x} at fixed t";
    return "";
}

//---------------------------------------------------------------------------//
struct Thresholds
{
    //! Band that the Monte Carlo / formula ratio interval must meet.
    double band_lo = 0.75;
    double band_hi = 1.25;
    //! Fraction of eligible points that must pass.
    double pass_fraction = 1.0;
    //! |ratio - limit| allowed by the tail-class diagnostics.
    double ratio_tol = 0.1;
    double light_long_tol = 0.05;
    //! Allowed shortfall of the big-jump estimate below its lower bound.
    double bigjump_slack = 0.05;
    std::uint64_t min_conditioning_hits = 500;
    //! P{M_t > x} above which an equivalence ratio is pre-asymptotic.
    double pre_asymptotic_p = 0.1;
    std::uint64_t min_equivalence_hits = 100;
    //! Number of largest eligible x per horizon that decide the verdict.
    std::size_t equivalence_points = 2;
};

struct OutputSpec
{
    std::string dir;
    std::string name;
    std::string format = "csv";
};

struct BigJumpSettings
{
    std::optional<double> epsilon;
    std::optional<double> A;
    std::uint64_t calibration_paths = 10'000;
    double calibration_quantile = 0.95;
};

struct RuinSettings
{
    Distribution claims = Distribution::pareto(2, 1);
    Distribution interarrival = Distribution::exponential(1);
    double premium = 0;
};

//---------------------------------------------------------------------------//
struct ExperimentConfig
{
    std::string scenario;
    std::optional<ProcessSpec> process;
    //! tails: law under study, light partner and small-tau inputs.
    std::optional<Distribution> distribution;
    std::optional<Distribution> light;
    std::optional<Distribution> tau;
    std::optional<double> tau_c;
    //! stopped: "general", "mean" or "both".
    std::string stopped_mode = "both";
    BigJumpSettings bigjump;
    std::optional<RuinSettings> ruin;

    std::vector<double> x_grid;
    std::vector<double> t_grid;
    //! Simulation horizon standing in for t = inf.
    std::optional<double> mc_horizon;
    std::uint64_t n_paths = 100'000;
    std::uint64_t ent_paths = 100'000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    Thresholds thresholds;
    OutputSpec output;

    //! Resolved configuration, defaults included.
    Json echo() const;
};

//---------------------------------------------------------------------------//
namespace detail
{
inline Json const& require(Json const& j, char const* key, std::string const& where)
{
    if (!j.is_object() || !j.contains(key))
    {
        throw SchemaError(where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

inline double number(Json const& j, std::string const& where)
{
    if (j.is_number())
    {
        return j.get<double>();
    }
    if (j.is_string())
    {
        auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity")
        {
            return infinity;
        }
    }
    throw SchemaError(where + ": expected a number");
}

inline double number_field(Json const& j, char const* key, std::string const& where)
{
    return number(require(j, key, where), where + "." + key);
}

inline double
number_or(Json const& j, char const* key, double fallback, std::string const& where)
{
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

inline std::uint64_t count_field(Json const& j, std::string const& where)
{
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_float() && j.get<double>() >= 0
        && std::floor(j.get<double>()) == j.get<double>())
    {
        return static_cast<std::uint64_t>(j.get<double>());
    }
    throw SchemaError(where + ": expected a nonnegative integer");
}

inline std::string string_field(Json const& j, std::string const& where)
{
    if (!j.is_string())
    {
        throw SchemaError(where + ": expected a string");
    }
    return j.get<std::string>();
}

inline void reject_unknown(Json const& j,
                           std::set<std::string> const& known,
                           std::string const& where)
{
    for (auto const& [key, value] : j.items())
    {
        if (!known.count(key))
        {
            throw SchemaError(where + ": unknown field '" + key + "'");
        }
    }
}

inline std::vector<double> grid(Json const& j, std::string const& where)
{
    if (!j.is_array())
    {
        throw SchemaError(where + ": expected an array");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    if (out.empty())
    {
        throw SchemaError(where + ": grid must not be empty");
    }
    for (std::size_t i = 1; i < out.size(); ++i)
    {
        if (!(out[i] > out[i - 1]))
        {
            throw SchemaError(where + ": grid must be strictly increasing");
        }
    }
    return out;
}

inline Json number_json(double v)
{
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Parse a distribution block such as
 *   {"family": "pareto", "alpha": 1.5, "xm": 1, "shift": 4}.
 *
 * \c shift subtracts a constant (Y = Z - shift) and \c positive_part takes
 * the law of Y^+.
 */
inline Distribution parse_distribution(Json const& j, std::string const& where)
{
    if (!j.is_object())
    {
        throw SchemaError(where + ": expected a distribution object");
    }
    auto family = detail::string_field(detail::require(j, "family", where), where + ".family");
    std::set<std::string> known{"family", "shift", "positive_part"};
    auto num = [&](char const* key) {
        known.insert(key);
        return detail::number_field(j, key, where);
    };
    std::optional<Distribution> d;
    if (family == "pareto")
    {
        double alpha = num("alpha");
        d = Distribution::pareto(alpha, num("xm"));
    }
    else if (family == "weibull")
    {
        double shape = num("shape");
        d = Distribution::weibull(shape, num("scale"));
    }
    else if (family == "lognormal")
    {
        double mu = num("mu");
        d = Distribution::lognormal(mu, num("sigma"));
    }
    else if (family == "exponential")
    {
        d = Distribution::exponential(num("rate"));
    }
    else if (family == "deterministic")
    {
        d = Distribution::deterministic(num("value"));
    }
    else
    {
        throw SchemaError(where + ".family: unknown family '" + family + "'");
    }
    detail::reject_unknown(j, known, where);
    if (j.contains("shift"))
    {
        d = d->shifted(detail::number(j.at("shift"), where + ".shift"));
    }
    if (j.contains("positive_part"))
    {
        if (!j.at("positive_part").is_boolean())
        {
            throw SchemaError(where + ".positive_part: expected a boolean");
        }
        if (j.at("positive_part").get<bool>())
        {
            d = d->positive_part();
        }
    }
    return *d;
}

inline Json distribution_json(Distribution const& d)
{
    Json j;
    j["family"] = to_string(d.family());
    switch (d.family())
    {
        case Family::pareto:
            j["alpha"] = d.param1();
            j["xm"] = d.param2();
            break;
        case Family::weibull:
            j["shape"] = d.param1();
            j["scale"] = d.param2();
            break;
        case Family::lognormal:
            j["mu"] = d.param1();
            j["sigma"] = d.param2();
            break;
        case Family::exponential: j["rate"] = d.param1(); break;
        case Family::deterministic: j["value"] = d.param1(); break;
    }
    if (d.shift() != 0)
    {
        j["shift"] = d.shift();
    }
    if (d.is_positive_part())
    {
        j["positive_part"] = true;
    }
    return j;
}

/*!
 * Parse a process block. Kinds: random_walk, compound_renewal,
 * compound_poisson and jump_diffusion.
 */
inline ProcessSpec parse_process(Json const& j, std::string const& where)
{
    if (!j.is_object())
    {
        throw SchemaError(where + ": expected a process object");
    }
    auto kind = detail::string_field(detail::require(j, "kind", where), where + ".kind");
    auto jump = parse_distribution(detail::require(j, "jump", where), where + ".jump");
    if (kind == "random_walk")
    {
        detail::reject_unknown(j, {"kind", "jump"}, where);
        return ProcessSpec::random_walk(jump);
    }
    if (kind == "compound_renewal")
    {
        detail::reject_unknown(j, {"kind", "jump", "interarrival", "c"}, where);
        auto tau = parse_distribution(detail::require(j, "interarrival", where),
                                      where + ".interarrival");
        return ProcessSpec::compound_renewal(jump, tau, detail::number_or(j, "c", 0, where));
    }
    if (kind == "compound_poisson")
    {
        detail::reject_unknown(j, {"kind", "jump", "rate", "c"}, where);
        return ProcessSpec::compound_poisson(
            jump, detail::number_field(j, "rate", where), detail::number_or(j, "c", 0, where));
    }
    if (kind == "jump_diffusion")
    {
        detail::reject_unknown(j, {"kind", "jump", "rate", "sigma", "brownian_drift"}, where);
        return ProcessSpec::jump_diffusion(detail::number_or(j, "sigma", 0, where),
                                           detail::number_or(j, "brownian_drift", 0, where),
                                           detail::number_field(j, "rate", where),
                                           jump);
    }
    throw SchemaError(where + ".kind: unknown process kind '" + kind + "'");
}

inline Json process_json(ProcessSpec const& p)
{
    Json j;
    switch (p.kind)
    {
        case ProcessKind::random_walk:
            j["kind"] = "random_walk";
            j["jump"] = distribution_json(p.jump_law);
            break;
        case ProcessKind::compound_renewal:
            j["kind"] = "compound_renewal";
            j["jump"] = distribution_json(p.jump_law);
            j["interarrival"] = distribution_json(*p.interarrival);
            j["c"] = p.drift;
            break;
        case ProcessKind::jump_diffusion:
            j["kind"] = "jump_diffusion";
            j["jump"] = distribution_json(p.jump_law);
            j["rate"] = p.intensity();
            j["sigma"] = p.sigma;
            j["brownian_drift"] = p.drift;
            break;
    }
    return j;
}

//---------------------------------------------------------------------------//
/*!
 * Parse and validate an experiment configuration.
 *
 * Grids must be nonempty and strictly increasing, n_paths at least one, and
 * every block required by the scenario present.
 */
inline ExperimentConfig parse_config(Json const& j)
{
    using namespace detail;
    if (!j.is_object())
    {
        throw SchemaError("config: expected a JSON object");
    }
    reject_unknown(j,
                   {"scenario", "process", "distribution", "light", "tau", "tau_c",
                    "mode", "bigjump", "ruin", "x_grid", "t_grid", "mc_horizon",
                    "n_paths", "ent_paths", "seed", "workers", "thresholds", "output"},
                   "config");
    ExperimentConfig c;
    c.scenario = string_field(require(j, "scenario", "config"), "config.scenario");
    auto const& names = scenario_names();
    if (std::find(names.begin(), names.end(), c.scenario) == names.end())
    {
        throw SchemaError("config.scenario: unknown scenario '" + c.scenario + "'");
    }
    c.x_grid = grid(require(j, "x_grid", "config"), "config.x_grid");

    if (j.contains("n_paths"))
    {
        c.n_paths = count_field(j.at("n_paths"), "config.n_paths");
        if (c.n_paths < 1)
        {
            throw SchemaError("config.n_paths: must be at least 1");
        }
    }
    if (j.contains("ent_paths"))
    {
        c.ent_paths = count_field(j.at("ent_paths"), "config.ent_paths");
        if (c.ent_paths < 1)
        {
            throw SchemaError("config.ent_paths: must be at least 1");
        }
    }
    if (j.contains("seed"))
    {
        c.seed = count_field(j.at("seed"), "config.seed");
    }
    if (j.contains("workers"))
    {
        c.workers = static_cast<unsigned>(count_field(j.at("workers"), "config.workers"));
    }
    if (j.contains("mc_horizon"))
    {
        double h = number(j.at("mc_horizon"), "config.mc_horizon");
        if (!(h > 0) || std::isinf(h))
        {
            throw SchemaError("config.mc_horizon: must be finite and positive");
        }
        c.mc_horizon = h;
    }

    if (j.contains("thresholds"))
    {
        auto const& t = j.at("thresholds");
        std::string w = "config.thresholds";
        reject_unknown(t,
                       {"band_lo", "band_hi", "pass_fraction", "ratio_tol",
                        "light_long_tol", "bigjump_slack", "min_conditioning_hits",
                        "pre_asymptotic_p", "min_equivalence_hits", "equivalence_points"},
                       w);
        auto& th = c.thresholds;
        th.band_lo = number_or(t, "band_lo", th.band_lo, w);
        th.band_hi = number_or(t, "band_hi", th.band_hi, w);
        th.pass_fraction = number_or(t, "pass_fraction", th.pass_fraction, w);
        th.ratio_tol = number_or(t, "ratio_tol", th.ratio_tol, w);
        th.light_long_tol = number_or(t, "light_long_tol", th.light_long_tol, w);
        th.bigjump_slack = number_or(t, "bigjump_slack", th.bigjump_slack, w);
        th.pre_asymptotic_p = number_or(t, "pre_asymptotic_p", th.pre_asymptotic_p, w);
        if (t.contains("min_conditioning_hits"))
            th.min_conditioning_hits = count_field(t.at("min_conditioning_hits"), w);
        if (t.contains("min_equivalence_hits"))
            th.min_equivalence_hits = count_field(t.at("min_equivalence_hits"), w);
        if (t.contains("equivalence_points"))
            th.equivalence_points = count_field(t.at("equivalence_points"), w);
        if (!(th.band_lo < th.band_hi))
        {
            throw SchemaError(w + ": band_lo must be below band_hi");
        }
        if (!(th.pass_fraction > 0 && th.pass_fraction <= 1))
        {
            throw SchemaError(w + ".pass_fraction: must lie in (0, 1]");
        }
    }

    if (j.contains("output"))
    {
        auto const& o = j.at("output");
        reject_unknown(o, {"dir", "name", "format"}, "config.output");
        if (o.contains("dir"))
            c.output.dir = string_field(o.at("dir"), "config.output.dir");
        if (o.contains("name"))
            c.output.name = string_field(o.at("name"), "config.output.name");
        if (o.contains("format"))
            c.output.format = string_field(o.at("format"), "config.output.format");
        if (c.output.format != "csv" && c.output.format != "json")
        {
            throw SchemaError("config.output.format: must be 'csv' or 'json'");
        }
    }

    bool const needs_t = c.scenario != "tails" && c.scenario != "stopped";
    if (needs_t)
    {
        c.t_grid = grid(require(j, "t_grid", "config"), "config.t_grid");
        for (double t : c.t_grid)
        {
            if (!(t >= 0))
            {
                throw SchemaError("config.t_grid: horizons must be nonnegative");
            }
        }
        bool finite_only = c.scenario == "bigjump" || c.scenario == "willekens";
        if (std::isinf(c.t_grid.back()))
        {
            if (finite_only)
            {
                throw SchemaError("config.t_grid: scenario '" + c.scenario
                                  + "' needs finite horizons");
            }
            if (!c.mc_horizon)
            {
                throw SchemaError("config.mc_horizon: required when t_grid contains inf");
            }
        }
    }

    if (c.scenario == "tails")
    {
        c.distribution = parse_distribution(require(j, "distribution", "config"),
                                            "config.distribution");
        if (j.contains("light"))
            c.light = parse_distribution(j.at("light"), "config.light");
        if (j.contains("tau"))
        {
            c.tau = parse_distribution(j.at("tau"), "config.tau");
            c.tau_c = number_field(j, "tau_c", "config");
        }
    }
    else if (c.scenario == "ruin")
    {
        auto const& r = require(j, "ruin", "config");
        reject_unknown(r, {"claims", "interarrival", "premium"}, "config.ruin");
        RuinSettings s;
        s.claims = parse_distribution(require(r, "claims", "config.ruin"), "config.ruin.claims");
        s.interarrival = parse_distribution(require(r, "interarrival", "config.ruin"),
                                            "config.ruin.interarrival");
        s.premium = number_field(r, "premium", "config.ruin");
        c.ruin = s;
    }
    else
    {
        c.process = parse_process(require(j, "process", "config"), "config.process");
    }

    auto const kind = c.process ? std::optional{c.process->kind} : std::nullopt;
    if ((c.scenario == "rw") && kind != ProcessKind::random_walk)
    {
        throw SchemaError("config.process.kind: scenario 'rw' needs random_walk");
    }
    if (c.scenario == "renewal" && kind != ProcessKind::compound_renewal)
    {
        throw SchemaError("config.process.kind: scenario 'renewal' needs a renewal process");
    }
    if (c.scenario == "levy" && kind != ProcessKind::jump_diffusion)
    {
        throw SchemaError("config.process.kind: scenario 'levy' needs jump_diffusion");
    }
    if ((c.scenario == "stopped" || c.scenario == "bigjump" || c.scenario == "willekens")
        && kind == ProcessKind::random_walk)
    {
        throw SchemaError("config.process.kind: scenario '" + c.scenario
                          + "' needs a continuous-time process");
    }
    if (c.scenario == "stopped")
    {
        c.tau = parse_distribution(require(j, "tau", "config"), "config.tau");
        if (c.tau->lower() < 0)
        {
            throw SchemaError("config.tau: stopping time must be nonnegative");
        }
        if (j.contains("mode"))
        {
            c.stopped_mode = string_field(j.at("mode"), "config.mode");
        }
        if (c.stopped_mode != "general" && c.stopped_mode != "mean"
            && c.stopped_mode != "both")
        {
            throw SchemaError("config.mode: must be 'general', 'mean' or 'both'");
        }
    }
    if (c.scenario == "bigjump" && j.contains("bigjump"))
    {
        auto const& b = j.at("bigjump");
        std::string w = "config.bigjump";
        reject_unknown(b, {"epsilon", "A", "calibration_paths", "calibration_quantile"}, w);
        if (b.contains("epsilon"))
            c.bigjump.epsilon = number(b.at("epsilon"), w + ".epsilon");
        if (b.contains("A"))
            c.bigjump.A = number(b.at("A"), w + ".A");
        if (b.contains("calibration_paths"))
            c.bigjump.calibration_paths = count_field(b.at("calibration_paths"), w);
        c.bigjump.calibration_quantile
            = number_or(b, "calibration_quantile", c.bigjump.calibration_quantile, w);
        if (c.bigjump.calibration_paths < 1)
        {
            throw SchemaError(w + ".calibration_paths: must be at least 1");
        }
    }
    return c;
}

inline ExperimentConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error("cannot open config file '" + path + "'");
    }
    Json j;
    try
    {
        j = Json::parse(in, nullptr, true, true);
    }
    catch (Json::parse_error const& e)
    {
        throw SchemaError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline Json ExperimentConfig::echo() const
{
    Json j;
    j["scenario"] = scenario;
    if (process)
        j["process"] = process_json(*process);
    if (distribution)
        j["distribution"] = distribution_json(*distribution);
    if (light)
        j["light"] = distribution_json(*light);
    if (tau)
        j["tau"] = distribution_json(*tau);
    if (tau_c)
        j["tau_c"] = *tau_c;
    if (scenario == "stopped")
        j["mode"] = stopped_mode;
    if (ruin)
    {
        j["ruin"] = {{"claims", distribution_json(ruin->claims)},
                     {"interarrival", distribution_json(ruin->interarrival)},
                     {"premium", ruin->premium}};
    }
    if (scenario == "bigjump")
    {
        Json b;
        // unset values are resolved per horizon and reported with the results
        if (bigjump.epsilon)
            b["epsilon"] = *bigjump.epsilon;
        if (bigjump.A)
            b["A"] = *bigjump.A;
        b["calibration_paths"] = bigjump.calibration_paths;
        b["calibration_quantile"] = bigjump.calibration_quantile;
        j["bigjump"] = b;
    }
    Json xs = Json::array();
    for (double x : x_grid)
        xs.push_back(detail::number_json(x));
    j["x_grid"] = xs;
    if (!t_grid.empty())
    {
        Json ts = Json::array();
        for (double t : t_grid)
            ts.push_back(detail::number_json(t));
        j["t_grid"] = ts;
    }
    if (mc_horizon)
        j["mc_horizon"] = *mc_horizon;
    j["n_paths"] = n_paths;
    j["ent_paths"] = ent_paths;
    j["seed"] = seed;
    j["workers"] = workers;
    auto const& th = thresholds;
    j["thresholds"] = {{"band_lo", th.band_lo},
                       {"band_hi", th.band_hi},
                       {"pass_fraction", th.pass_fraction},
                       {"ratio_tol", th.ratio_tol},
                       {"light_long_tol", th.light_long_tol},
                       {"bigjump_slack", th.bigjump_slack},
                       {"min_conditioning_hits", th.min_conditioning_hits},
                       {"pre_asymptotic_p", th.pre_asymptotic_p},
                       {"min_equivalence_hits", th.min_equivalence_hits},
                       {"equivalence_points", th.equivalence_points}};
    j["output"] = {{"dir", output.dir}, {"name", output.name}, {"format", output.format}};
    return j;
}

}  // namespace bigjump
