// SPDX-License-Identifier: Apache-2.0
//
// rcialloc: power, regularization and group-loading allocation for RCI precoding.
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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace
{

struct Flags
{
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> log_base;
    std::optional<std::size_t> trials;
    bool early_break = false;
    std::optional<double> tol;
};

void add_flags(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--config", f.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed (overrides mc.seed)");
    cmd->add_option("--log-base", f.log_base, "rate log base")->check(CLI::IsMember({"e", "2"}));
    cmd->add_option("--trials", f.trials, "Monte Carlo trials (overrides mc.trials)");
    cmd->add_flag("--early-break", f.early_break, "stop the loading search after the first negative eta");
    cmd->add_option("--tol", f.tol, "validation tolerance (overrides validate.tolerance)");
}

nlohmann::json read_document(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw rci::ConfigError("cannot open config file '" + path + "'");
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw rci::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

// Flags are merged into the document so the config hash covers the effective settings.
nlohmann::json apply_flags(nlohmann::json doc, const Flags &f)
{
    if (!doc.is_object())
        throw rci::ConfigError("config root must be an object");
    if (f.out)
        doc["output"]["dir"] = *f.out;
    if (f.seed)
        doc["mc"]["seed"] = *f.seed;
    if (f.trials)
        doc["mc"]["trials"] = *f.trials;
    if (f.log_base)
        doc["solver"]["log_base"] = *f.log_base;
    if (f.early_break)
        doc["solver"]["early_break"] = true;
    if (f.tol)
        doc["validate"]["tolerance"] = *f.tol;
    return doc;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Power, regularization and group-loading allocation for RCI precoding"};
    app.require_subcommand(1);

    Flags flags;
    std::string command;
    for (const char *name : {"p1", "p2", "p3", "mc", "validate"})
    {
        static const std::map<std::string, std::string> help{
            {"p1", "optimal power and regularization for fixed loadings"},
            {"p2", "binary group loading: per-mode rates and best mode"},
            {"p3", "fractional group loading with the full iteration trace"},
            {"mc", "finite-size Monte Carlo sum rate at the limiting optimum"},
            {"validate", "oracle comparisons with a pass/fail report"}};
        auto *cmd = app.add_subcommand(name, help.at(name));
        add_flags(cmd, flags);
        cmd->callback([&command, name] { command = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try
    {
        const rci::ExperimentConfig cfg = rci::parse_config(apply_flags(read_document(flags.config), flags));

        std::vector<rci::OutputFile> files;
        int status = 0;
        if (command == "p1")
            files = rci::run_p1(cfg);
        else if (command == "p2")
            files = rci::run_p2(cfg);
        else if (command == "p3")
            files = rci::run_p3(cfg);
        else if (command == "mc")
            files = rci::run_mc(cfg);
        else
        {
            auto rep = rci::run_validate(cfg);
            files = std::move(rep.files);
            status = rep.all_passed ? 0 : 2;
        }

        rci::write_outputs(cfg.out_dir, files);
        for (const auto &f : files)
            std::cout << cfg.out_dir << "/" << f.name << "\n";
        if (status != 0)
            std::cerr << "rcialloc: validation failed, see " << cfg.out_dir << "/validate.csv\n";
        return status;
    }
    catch (const rci::ConfigError &e)
    {
        std::cerr << "rcialloc: config error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "rcialloc: " << e.what() << "\n";
        return 1;
    }
}
