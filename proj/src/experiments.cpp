// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "rci/experiments.hpp"

#include "rci/finite_mc.hpp"
#include "rci/rho_opt.hpp"
#include "rci/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

namespace rci
{

using nlohmann::json;

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<double> Sweep::values() const
{
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i)
        out.push_back(start + static_cast<double>(i) * step);
    return out;
}

std::vector<double> ExperimentConfig::snr_points_db() const
{
    if (snr_db_sweep)
        return snr_db_sweep->values();
    return {snr_db};
}

std::string ExperimentConfig::hash() const
{
    // FNV-1a over the normalized document.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : document.dump())
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> path_gain_rule(const std::string &rule, std::size_t groups)
{
    if (groups == 0)
        throw ConfigError("path_gain_rule needs scenario.groups >= 1");
    std::vector<double> out(groups, 1.0);
    if (rule == "1")
        return out;
    static const std::regex pattern(R"(\s*1\s*/\s*j\s*\^\s*([0-9]*\.?[0-9]+)\s*)");
    std::smatch m;
    if (!std::regex_match(rule, m, pattern))
        throw ConfigError("unsupported path_gain_rule '" + rule + "' (expected \"1/j^k\" or \"1\")");
    const double k = std::stod(m[1].str());
    for (std::size_t j = 0; j < groups; ++j)
        out[j] = 1.0 / std::pow(static_cast<double>(j + 1), k);
    return out;
}

namespace
{

void check_keys(const json &obj, const std::string &block, std::initializer_list<const char *> allowed)
{
    if (!obj.is_object())
        throw ConfigError("'" + block + "' must be an object");
    for (const auto &[key, _] : obj.items())
    {
        bool ok = false;
        for (const char *a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError("unknown key '" + block + "." + key + "'");
    }
}

template <typename T>
T get(const json &obj, const char *key, const std::string &block, T fallback)
{
    if (!obj.contains(key))
        return fallback;
    try
    {
        return obj.at(key).get<T>();
    }
    catch (const json::exception &)
    {
        throw ConfigError("'" + block + "." + key + "' has the wrong type");
    }
}

std::vector<double> number_list(const json &obj, const char *key, const std::string &block)
{
    const auto v = get<std::vector<double>>(obj, key, block, {});
    for (double x : v)
        if (!std::isfinite(x))
            throw ConfigError("'" + block + "." + key + "' must contain finite numbers");
    return v;
}

Sweep parse_sweep(const json &obj, const std::string &name)
{
    check_keys(obj, name, {"start", "stop", "step"});
    if (!obj.contains("start") || !obj.contains("stop") || !obj.contains("step"))
        throw ConfigError("'" + name + "' needs start, stop and step");
    Sweep s{get<double>(obj, "start", name, 0.0), get<double>(obj, "stop", name, 0.0),
            get<double>(obj, "step", name, 1.0)};
    if (!(s.step > 0.0) || !(s.stop >= s.start))
        throw ConfigError("'" + name + "' needs step > 0 and stop >= start");
    if ((s.stop - s.start) / s.step > 1e6)
        throw ConfigError("'" + name + "' has too many points");
    return s;
}

double rate_out(const ExperimentConfig &cfg, double nats)
{
    return cfg.log_base == LogBase::two ? nats / std::numbers::ln2 : nats;
}

const char *base_name(const ExperimentConfig &cfg)
{
    return cfg.log_base == LogBase::two ? "2" : "e";
}

json header(const ExperimentConfig &cfg, const char *command)
{
    return json{{"command", command}, {"config_hash", cfg.hash()}, {"log_base", base_name(cfg)}};
}

std::string dump(const json &doc)
{
    return doc.dump(2) + "\n";
}

Scenario scenario_for(const ExperimentConfig &cfg, std::vector<double> loading, double snr_db)
{
    return Scenario::sorted(cfg.path_gain_sq, loading, db_to_linear(snr_db));
}

// Reorders a per-group vector given in input order into the scenario's sorted order.
std::vector<double> to_sorted(const Scenario &s, const std::vector<double> &v)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[s.order()[i]];
    return out;
}

std::vector<double> p1_loading(const ExperimentConfig &cfg)
{
    if (!cfg.loading.empty())
        return cfg.loading;
    if (!cfg.beta_max.empty())
        return cfg.beta_max;
    throw ConfigError("scenario.loading (or scenario.beta_max) is required");
}

std::vector<OutputFile> select(const ExperimentConfig &cfg, std::vector<OutputFile> files)
{
    std::vector<OutputFile> out;
    for (auto &f : files)
    {
        const bool is_json = f.name.ends_with(".json");
        if (cfg.format == "both" || (cfg.format == "json" && is_json) || (cfg.format == "csv" && !is_json))
            out.push_back(std::move(f));
    }
    return out;
}

json mode_json(const ExperimentConfig &cfg, const ModeSolution &m)
{
    return json{{"mode_m", m.mode_m},
                {"loadings", m.loadings},
                {"beta_star", m.beta_star},
                {"rho_star", m.p1.rho_star},
                {"p_bar", m.p1.alloc.p_bar},
                {"lambda", m.lambda},
                {"mu", m.mu},
                {"eta_m", m.eta_m},
                {"eta", eta_values(m)},
                {"rate", rate_out(cfg, m.rate())}};
}

} // namespace

ExperimentConfig parse_config(const json &doc)
{
    check_keys(doc, "config", {"scenario", "solver", "mc", "validate", "output"});
    if (!doc.contains("scenario"))
        throw ConfigError("missing 'scenario' block");

    ExperimentConfig cfg;
    cfg.document = doc;

    const json &sc = doc.at("scenario");
    check_keys(sc, "scenario",
               {"groups", "path_gain_sq", "path_gain_rule", "loading", "beta_max", "snr_db", "snr_db_sweep",
                "beta_sweep"});
    if (sc.contains("path_gain_sq") == sc.contains("path_gain_rule"))
        throw ConfigError("give exactly one of scenario.path_gain_sq and scenario.path_gain_rule");
    if (sc.contains("path_gain_sq"))
        cfg.path_gain_sq = number_list(sc, "path_gain_sq", "scenario");
    else
        cfg.path_gain_sq = path_gain_rule(get<std::string>(sc, "path_gain_rule", "scenario", ""),
                                          get<std::size_t>(sc, "groups", "scenario", 0));
    const std::size_t L = cfg.path_gain_sq.size();
    if (L == 0)
        throw ConfigError("scenario needs at least one group");
    if (sc.contains("groups") && get<std::size_t>(sc, "groups", "scenario", 0) != L)
        throw ConfigError("scenario.groups does not match the number of path gains");
    for (double a : cfg.path_gain_sq)
        if (!(a > 0.0))
            throw ConfigError("scenario.path_gain_sq entries must be positive");

    cfg.loading = number_list(sc, "loading", "scenario");
    cfg.beta_max = number_list(sc, "beta_max", "scenario");
    for (const auto *v : {&cfg.loading, &cfg.beta_max})
    {
        if (v->empty())
            continue;
        if (v->size() != L)
            throw ConfigError("scenario loading vectors must have one entry per group");
        double total = 0.0;
        for (double b : *v)
        {
            if (!(b >= 0.0))
                throw ConfigError("scenario loadings must be non-negative");
            total += b;
        }
        if (!(total > 0.0))
            throw ConfigError("scenario loadings must not all be zero");
    }
    cfg.snr_db = get<double>(sc, "snr_db", "scenario", cfg.snr_db);
    if (!std::isfinite(cfg.snr_db))
        throw ConfigError("scenario.snr_db must be finite");
    if (sc.contains("snr_db_sweep"))
        cfg.snr_db_sweep = parse_sweep(sc.at("snr_db_sweep"), "scenario.snr_db_sweep");
    if (sc.contains("beta_sweep"))
    {
        cfg.beta_sweep = parse_sweep(sc.at("beta_sweep"), "scenario.beta_sweep");
        if (!(cfg.beta_sweep->start > 0.0))
            throw ConfigError("scenario.beta_sweep must start above zero");
    }

    if (doc.contains("solver"))
    {
        const json &so = doc.at("solver");
        check_keys(so, "solver",
                   {"grid_points", "rho_tol", "beta_scan_points", "eta_tol", "eta_root_tol", "rate_tie_tol",
                    "early_break", "log_base", "p3_grid_step"});
        auto &o = cfg.solver;
        o.p1.grid_points = get<std::size_t>(so, "grid_points", "solver", o.p1.grid_points);
        o.p1.rho_tol = get<double>(so, "rho_tol", "solver", o.p1.rho_tol);
        o.beta_scan_points = get<std::size_t>(so, "beta_scan_points", "solver", o.beta_scan_points);
        o.eta_tol = get<double>(so, "eta_tol", "solver", o.eta_tol);
        o.eta_root_tol = get<double>(so, "eta_root_tol", "solver", o.eta_root_tol);
        o.rate_tie_tol = get<double>(so, "rate_tie_tol", "solver", o.rate_tie_tol);
        cfg.early_break = get<bool>(so, "early_break", "solver", cfg.early_break);
        cfg.p3_grid_step = get<double>(so, "p3_grid_step", "solver", cfg.p3_grid_step);
        const auto base = get<std::string>(so, "log_base", "solver", "e");
        if (base == "e")
            cfg.log_base = LogBase::natural;
        else if (base == "2")
            cfg.log_base = LogBase::two;
        else
            throw ConfigError("solver.log_base must be \"e\" or \"2\"");
        if (o.p1.grid_points < 1 || !(o.p1.rho_tol > 0.0) || o.beta_scan_points < 2 || !(o.eta_tol >= 0.0) ||
            !(o.eta_root_tol > 0.0) || !(o.rate_tie_tol >= 0.0) || !(cfg.p3_grid_step > 0.0))
            throw ConfigError("solver values out of range");
    }

    if (doc.contains("mc"))
    {
        const json &mc = doc.at("mc");
        check_keys(mc, "mc", {"antennas", "trials", "seed", "power_grid_step", "sizes", "convergence_trials"});
        cfg.has_mc = true;
        cfg.antennas = get<std::size_t>(mc, "antennas", "mc", cfg.antennas);
        cfg.trials = get<std::size_t>(mc, "trials", "mc", cfg.trials);
        cfg.seed = get<std::uint64_t>(mc, "seed", "mc", cfg.seed);
        cfg.power_grid_step = get<double>(mc, "power_grid_step", "mc", cfg.power_grid_step);
        cfg.convergence_sizes = get<std::vector<std::size_t>>(mc, "sizes", "mc", cfg.convergence_sizes);
        cfg.convergence_trials = get<std::size_t>(mc, "convergence_trials", "mc", cfg.convergence_trials);
        if (cfg.antennas < 1 || cfg.trials < 1 || !(cfg.power_grid_step > 0.0) || cfg.convergence_trials < 1)
            throw ConfigError("mc values out of range");
        for (auto n : cfg.convergence_sizes)
            if (n < 1 || n > 1024)
                throw ConfigError("mc.sizes entries must lie in 1..1024");
    }

    if (doc.contains("validate"))
    {
        const json &v = doc.at("validate");
        check_keys(v, "validate", {"tolerance"});
        cfg.tolerance = get<double>(v, "tolerance", "validate", cfg.tolerance);
        if (!(cfg.tolerance > 0.0))
            throw ConfigError("validate.tolerance must be positive");
    }

    if (doc.contains("output"))
    {
        const json &o = doc.at("output");
        check_keys(o, "output", {"dir", "format"});
        cfg.out_dir = get<std::string>(o, "dir", "output", cfg.out_dir);
        cfg.format = get<std::string>(o, "format", "output", cfg.format);
        if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both")
            throw ConfigError("output.format must be csv, json or both");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

double golden_section_rho(const Scenario &scenario, double lo, double hi, double tol)
{
    auto rate = [&](double rho) { return limiting_sum_rate(scenario, waterfill(scenario, rho).p_bar, rho); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = rate(c), fd = rate(d);
    while (b - a > tol)
    {
        if (fc > fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = rate(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = rate(d);
        }
    }
    return 0.5 * (a + b);
}

std::vector<OutputFile> run_p1(const ExperimentConfig &cfg)
{
    const auto loading = p1_loading(cfg);
    const auto snrs = cfg.snr_points_db();

    json doc = header(cfg, "p1");
    json results = json::array();
    std::ostringstream sweep, finite;
    sweep << "snr_db,beta,rho_star,lambda,m_active,rate";
    for (std::size_t j = 0; j < loading.size(); ++j)
        sweep << ",p_bar_" << j + 1;
    sweep << "\n";
    finite << "snr_db,rate_ls,rate_fs,gap,stderr_ls,stderr_fs\n";

    for (double snr_db : snrs)
    {
        const Scenario s = scenario_for(cfg, loading, snr_db);
        const P1Solution sol = solve_p1(s, cfg.solver.p1);

        json r{{"snr_db", snr_db},
               {"beta", s.beta_total()},
               {"group_order", s.order()},
               {"rho_star", sol.rho_star},
               {"rho_interval", {sol.rho_lo, sol.rho_hi}},
               {"lambda", sol.alloc.lambda},
               {"m_active", sol.alloc.m_active},
               {"p_bar", sol.alloc.p_bar},
               {"rate", rate_out(cfg, sol.rate)},
               {"residual", sol.residual}};
        if (!sol.diagnostic.empty())
            r["diagnostic"] = sol.diagnostic;

        sweep << format_number(snr_db) << ',' << format_number(s.beta_total()) << ','
              << format_number(sol.rho_star) << ',' << format_number(sol.alloc.lambda) << ','
              << sol.alloc.m_active << ',' << format_number(rate_out(cfg, sol.rate));
        for (double p : sol.alloc.p_bar)
            sweep << ',' << format_number(p);
        sweep << "\n";

        if (cfg.has_mc)
        {
            const auto cmp = compare_power_allocations(s, cfg.antennas, sol.alloc.p_bar, sol.rho_star, cfg.trials,
                                                       cfg.seed, cfg.power_grid_step);
            const double ls = rate_out(cfg, cmp.fixed.mean), fs = rate_out(cfg, cmp.grid_best.mean);
            r["finite"] = json{{"antennas", cfg.antennas}, {"trials", cfg.trials},     {"seed", cfg.seed},
                               {"rate_ls", ls},            {"rate_fs", fs},            {"gap", cmp.relative_gap},
                               {"stderr_ls", rate_out(cfg, cmp.fixed.std_error)},
                               {"stderr_fs", rate_out(cfg, cmp.grid_best.std_error)}};
            finite << format_number(snr_db) << ',' << format_number(ls) << ',' << format_number(fs) << ','
                   << format_number(cmp.relative_gap) << ',' << format_number(rate_out(cfg, cmp.fixed.std_error))
                   << ',' << format_number(rate_out(cfg, cmp.grid_best.std_error)) << "\n";
        }
        results.push_back(std::move(r));
    }
    doc["results"] = std::move(results);

    std::vector<OutputFile> files{{"p1.json", dump(doc)}};
    if (cfg.snr_db_sweep)
        files.push_back({"p1_sweep.csv", sweep.str()});
    if (cfg.has_mc)
        files.push_back({"p1_finite.csv", finite.str()});
    return select(cfg, std::move(files));
}

std::vector<OutputFile> run_p2(const ExperimentConfig &cfg)
{
    const std::size_t L = cfg.path_gain_sq.size();
    if (!cfg.beta_sweep && cfg.beta_max.empty())
        throw ConfigError("p2 needs scenario.beta_max or scenario.beta_sweep");

    json doc = header(cfg, "p2");
    std::vector<OutputFile> files;

    if (cfg.beta_sweep)
    {
        std::ostringstream csv;
        csv << "beta";
        for (std::size_t m = 1; m <= L; ++m)
            csv << ",rate_m" << m;
        csv << ",best_m\n";
        json curve = json::array();
        for (double beta : cfg.beta_sweep->values())
        {
            const std::vector<double> uniform(L, beta / static_cast<double>(L));
            const Scenario s = scenario_for(cfg, uniform, cfg.snr_db);
            const LoadingBounds bounds{to_sorted(s, uniform)};
            csv << format_number(beta);
            std::vector<double> rates;
            std::size_t best_m = 1;
            double best_rate = -INFINITY;
            for (std::size_t m = 1; m <= L; ++m)
            {
                const auto sol = solve_mode_binary(s, bounds, m, cfg.solver);
                rates.push_back(rate_out(cfg, sol.rate()));
                csv << ',' << format_number(rates.back());
                if (sol.rate() > best_rate + cfg.solver.rate_tie_tol)
                {
                    best_rate = sol.rate();
                    best_m = m;
                }
            }
            csv << ',' << best_m << "\n";
            curve.push_back(json{{"beta", beta}, {"rates", rates}, {"best_m", best_m}});
        }
        doc["sweep"] = std::move(curve);
        files.push_back({"p2_modes.csv", csv.str()});
    }

    if (!cfg.beta_max.empty())
    {
        const Scenario s = scenario_for(cfg, cfg.beta_max, cfg.snr_db);
        const LoadingBounds bounds{to_sorted(s, cfg.beta_max)};
        json modes = json::array();
        for (std::size_t m = 1; m <= L; ++m)
            modes.push_back(mode_json(cfg, solve_mode_binary(s, bounds, m, cfg.solver)));
        doc["modes"] = std::move(modes);
        doc["group_order"] = s.order();
        doc["winner"] = mode_json(cfg, solve_p2(s, bounds, cfg.solver));
    }

    files.insert(files.begin(), OutputFile{"p2.json", dump(doc)});
    return select(cfg, std::move(files));
}

std::vector<OutputFile> run_p3(const ExperimentConfig &cfg)
{
    if (cfg.beta_max.empty())
        throw ConfigError("p3 needs scenario.beta_max");
    const Scenario s = scenario_for(cfg, cfg.beta_max, cfg.snr_db);
    const LoadingBounds bounds{to_sorted(s, cfg.beta_max)};
    const P3Result res = solve_p3(s, bounds, cfg.early_break, cfg.solver);

    json doc = header(cfg, "p3");
    doc["early_break"] = cfg.early_break;
    doc["group_order"] = s.order();

    std::ostringstream trace_csv;
    trace_csv << "iteration,M,skipped,solved_beta_m,beta_m,beta_star,rate,eta\n";
    json trace = json::array();
    for (const auto &it : res.trace)
    {
        trace.push_back(json{{"iteration", it.j},
                             {"M", it.M},
                             {"skipped", it.skipped},
                             {"eta", it.eta},
                             {"solved_beta_m", it.solved_beta_m},
                             {"beta_m", it.beta_m},
                             {"loadings", it.loadings},
                             {"beta_star", it.beta_star},
                             {"rate", rate_out(cfg, it.rate)}});
        std::string eta;
        for (double e : it.eta)
            eta += (eta.empty() ? "" : ";") + format_number(e);
        trace_csv << it.j << ',' << it.M << ',' << (it.skipped ? 1 : 0) << ',' << (it.solved_beta_m ? 1 : 0) << ','
                  << format_number(it.beta_m) << ',' << format_number(it.beta_star) << ','
                  << format_number(rate_out(cfg, it.rate)) << ',' << eta << "\n";
    }
    doc["trace"] = std::move(trace);

    std::ostringstream cand_csv;
    cand_csv << "M,beta_star,rho_star,rate\n";
    json cands = json::array();
    for (const auto &c : res.candidates)
    {
        cands.push_back(mode_json(cfg, c));
        cand_csv << c.mode_m << ',' << format_number(c.beta_star) << ',' << format_number(c.p1.rho_star) << ','
                 << format_number(rate_out(cfg, c.rate())) << "\n";
    }
    doc["candidates"] = std::move(cands);
    doc["winner"] = mode_json(cfg, res.best);

    return select(cfg, {{"p3.json", dump(doc)}, {"p3_trace.csv", trace_csv.str()},
                        {"p3_candidates.csv", cand_csv.str()}});
}

std::vector<OutputFile> run_mc(const ExperimentConfig &cfg)
{
    const auto loading = p1_loading(cfg);
    json doc = header(cfg, "mc");
    doc["antennas"] = cfg.antennas;
    doc["trials"] = cfg.trials;
    doc["seed"] = cfg.seed;

    std::ostringstream csv;
    csv << "snr_db,trial,sum_rate\n";
    json results = json::array();
    for (double snr_db : cfg.snr_points_db())
    {
        const Scenario s = scenario_for(cfg, loading, snr_db);
        const P1Solution sol = solve_p1(s, cfg.solver.p1);
        const McEstimate est = mc_expected_sum_rate(s, cfg.antennas, sol.alloc.p_bar, sol.rho_star, cfg.trials, cfg.seed);
        for (std::size_t t = 0; t < est.per_trial.size(); ++t)
            csv << format_number(snr_db) << ',' << t << ',' << format_number(rate_out(cfg, est.per_trial[t])) << "\n";
        results.push_back(json{{"snr_db", snr_db},
                               {"rho_star", sol.rho_star},
                               {"p_bar", sol.alloc.p_bar},
                               {"users_per_group", users_per_group(s.loading(), cfg.antennas)},
                               {"mean_rate", rate_out(cfg, est.mean)},
                               {"std_error", rate_out(cfg, est.std_error)},
                               {"limiting_rate", rate_out(cfg, sol.rate)}});
    }
    doc["results"] = std::move(results);
    return select(cfg, {{"mc.json", dump(doc)}, {"mc_trials.csv", csv.str()}});
}

ValidationReport run_validate(const ExperimentConfig &cfg)
{
    ValidationReport rep;
    json doc = header(cfg, "validate");
    doc["tolerance"] = cfg.tolerance;
    json checks = json::array();
    std::ostringstream csv;
    csv << "check,measured,reference,delta,tolerance,pass\n";

    auto record = [&](const std::string &name, double measured, double reference, double tol, bool pass,
                      json extra = json::object()) {
        const double delta = std::abs(measured - reference);
        extra["check"] = name;
        extra["measured"] = measured;
        extra["reference"] = reference;
        extra["delta"] = delta;
        extra["tolerance"] = tol;
        extra["pass"] = pass;
        checks.push_back(std::move(extra));
        csv << name << ',' << format_number(measured) << ',' << format_number(reference) << ','
            << format_number(delta) << ',' << format_number(tol) << ',' << (pass ? "pass" : "fail") << "\n";
        rep.all_passed = rep.all_passed && pass;
    };

    const double snr_db = cfg.snr_points_db().front();

    // Loading grid search against the fractional-loading algorithm.
    if (!cfg.beta_max.empty())
    {
        const Scenario s = scenario_for(cfg, cfg.beta_max, snr_db);
        const LoadingBounds bounds{to_sorted(s, cfg.beta_max)};
        const auto alg = solve_p3(s, bounds, cfg.early_break, cfg.solver);
        const auto grid = brute_force_p3(s, bounds, cfg.p3_grid_step, cfg.solver.p1);
        const double r_alg = rate_out(cfg, alg.best.rate()), r_grid = rate_out(cfg, grid.rate);
        record("p3_grid_rate", r_grid, r_alg, cfg.tolerance, std::abs(r_grid - r_alg) <= cfg.tolerance,
               json{{"grid_beta", grid.beta}, {"algorithm_beta", alg.best.beta_star}});
        const double beta_tol = std::max(cfg.p3_grid_step, 1e-3);
        record("p3_grid_beta", grid.beta, alg.best.beta_star, beta_tol,
               std::abs(grid.beta - alg.best.beta_star) <= beta_tol);
    }

    // Root-based rho against a golden-section maximizer.
    const auto loading = cfg.loading.empty() ? cfg.beta_max : cfg.loading;
    if (!loading.empty())
    {
        const Scenario s = scenario_for(cfg, loading, snr_db);
        const P1Solution sol = solve_p1(s, cfg.solver.p1);
        const double rho_gs = sol.rho_hi > sol.rho_lo ? golden_section_rho(s, sol.rho_lo, sol.rho_hi) : sol.rho_lo;
        const double r_gs = limiting_sum_rate(s, waterfill(s, rho_gs).p_bar, rho_gs);
        record("p1_golden_rate", rate_out(cfg, sol.rate), rate_out(cfg, r_gs), cfg.tolerance,
               sol.rate >= r_gs - cfg.tolerance, json{{"rho_star", sol.rho_star}, {"rho_golden", rho_gs}});

        if (cfg.has_mc && !cfg.convergence_sizes.empty())
        {
            double prev = INFINITY;
            for (std::size_t n : cfg.convergence_sizes)
            {
                const auto dev = sinr_deviation(s, n, sol.alloc.p_bar, sol.rho_star, cfg.convergence_trials, cfg.seed);
                const bool decreasing = dev.trial_averaged < prev;
                record("mc_convergence_N" + std::to_string(n), dev.trial_averaged, 0.0, prev, decreasing,
                       json{{"antennas", n}, {"per_realization", dev.per_realization}});
                prev = dev.trial_averaged;
            }
        }
    }

    doc["checks"] = std::move(checks);
    doc["all_passed"] = rep.all_passed;
    rep.files = select(cfg, {{"validate.json", dump(doc)}, {"validate.csv", csv.str()}});
    return rep;
}

void write_outputs(const std::string &dir, const std::vector<OutputFile> &files)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<fs::path> staged;
    for (const auto &f : files)
    {
        const fs::path tmp = fs::path(dir) / (f.name + ".tmp");
        std::ofstream out(tmp, std::ios::binary);
        out << f.content;
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        staged.push_back(tmp);
    }
    for (std::size_t i = 0; i < files.size(); ++i)
        fs::rename(staged[i], fs::path(dir) / files[i].name);
}

} // namespace rci
