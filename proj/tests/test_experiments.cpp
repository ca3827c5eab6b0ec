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

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sys/wait.h>
#include <sstream>

using namespace rci;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

json five_group_doc()
{
    return json::parse(R"({
        "scenario": {"path_gain_rule": "1/j^2", "groups": 5, "beta_max": [0.1, 0.7, 0.1, 0.05, 0.05], "snr_db": 10},
        "solver": {"p3_grid_step": 0.001}
    })");
}

const OutputFile &file(const std::vector<OutputFile> &files, const std::string &name)
{
    for (const auto &f : files)
        if (f.name == name)
            return f;
    FAIL("missing output " << name);
    static OutputFile none;
    return none;
}

bool has_file(const std::vector<OutputFile> &files, const std::string &name)
{
    for (const auto &f : files)
        if (f.name == name)
            return true;
    return false;
}

std::string first_line(const std::string &s)
{
    return s.substr(0, s.find('\n'));
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name)
{
    const fs::path dir = fs::temp_directory_path() / ("rcialloc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string &args)
{
    const std::string cmd = std::string(RCIALLOC_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST_SUITE("experiments")
{

TEST_CASE("path gain rules")
{
    const auto a = path_gain_rule("1/j^2", 3);
    CHECK(a[0] == 1.0);
    CHECK(a[1] == 0.25);
    CHECK(a[2] == doctest::Approx(1.0 / 9.0));
    CHECK(path_gain_rule("1", 2) == std::vector<double>{1.0, 1.0});
    CHECK(path_gain_rule("1/j^1.5", 2)[1] == doctest::Approx(std::pow(2.0, -1.5)));
    CHECK_THROWS_AS(path_gain_rule("exp(-j)", 2), ConfigError);
    CHECK_THROWS_AS(path_gain_rule("1/j^2", 0), ConfigError);
}

TEST_CASE("config validation")
{
    CHECK_NOTHROW(parse_config(five_group_doc()));

    auto bad = [](const char *text) { return parse_config(json::parse(text)); };
    CHECK_THROWS_AS(bad(R"({})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}, "extra": 1})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1], "snr": 3}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1, 0.5], "loading": [1]}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1, -0.5], "loading": [1, 1]}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [-1]}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [0]}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "path_gain_rule": "1", "loading": [1]}})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": "one", "loading": [1]}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}, "solver": {"log_base": "10"}})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}, "solver": {"grid_points": 0}})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}, "mc": {"trials": 0}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}, "output": {"format": "xml"}})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1],
                                         "snr_db_sweep": {"start": 5, "stop": 0, "step": 1}}})"),
                    ConfigError);
    CHECK_THROWS_AS(bad(R"({"scenario": {"path_gain_sq": [1], "loading": [1], "groups": 2}})"), ConfigError);
}

TEST_CASE("config hash tracks the effective document")
{
    auto a = five_group_doc();
    auto b = five_group_doc();
    CHECK(parse_config(a).hash() == parse_config(b).hash());
    b["solver"]["log_base"] = "2";
    CHECK(parse_config(a).hash() != parse_config(b).hash());
    CHECK(parse_config(a).hash().size() == 16);
}

TEST_CASE("sweep points")
{
    const Sweep s{0.0, 20.0, 2.0};
    const auto v = s.values();
    REQUIRE(v.size() == 11);
    CHECK(v.back() == 20.0);
    const Sweep b{0.2, 3.0, 0.2};
    CHECK(b.values().size() == 15);
}

TEST_CASE("single group: rho equals beta over gamma")
{
    const auto cfg = parse_config(json::parse(R"({"scenario": {"path_gain_sq": [1], "loading": [0.8], "snr_db": 10}})"));
    const auto out = run_p1(cfg);
    const auto doc = json::parse(file(out, "p1.json").content);
    CHECK(doc["results"][0]["rho_star"].get<double>() == doctest::Approx(0.08).epsilon(1e-14));
    CHECK(doc["config_hash"] == cfg.hash());
    CHECK(doc["log_base"] == "e");
    CHECK(!has_file(out, "p1_sweep.csv"));
}

TEST_CASE("unsorted input groups are reported with their permutation")
{
    const auto cfg = parse_config(
        json::parse(R"({"scenario": {"path_gain_sq": [0.25, 1], "loading": [0.5, 0.5], "snr_db": 10}})"));
    const auto doc = json::parse(file(run_p1(cfg), "p1.json").content);
    CHECK(doc["results"][0]["group_order"] == json::array({1, 0}));
    const auto p = doc["results"][0]["p_bar"].get<std::vector<double>>();
    CHECK(p[0] > p[1]);
}

TEST_CASE("p1 sweep and finite comparison tables")
{
    const auto cfg = parse_config(json::parse(R"({
        "scenario": {"path_gain_rule": "1/j^2", "groups": 2, "loading": [0.5, 0.5],
                     "snr_db_sweep": {"start": 0, "stop": 20, "step": 10}},
        "mc": {"antennas": 8, "trials": 20, "seed": 3}
    })"));
    const auto out = run_p1(cfg);
    CHECK(first_line(file(out, "p1_sweep.csv").content) == "snr_db,beta,rho_star,lambda,m_active,rate,p_bar_1,p_bar_2");
    const auto &fin = file(out, "p1_finite.csv").content;
    CHECK(first_line(fin) == "snr_db,rate_ls,rate_fs,gap,stderr_ls,stderr_fs");
    CHECK(std::count(fin.begin(), fin.end(), '\n') == 4);
}

TEST_CASE("p2 mode curves")
{
    const auto cfg = parse_config(json::parse(R"({
        "scenario": {"path_gain_rule": "1/j^2", "groups": 3, "snr_db": 10,
                     "beta_sweep": {"start": 0.2, "stop": 3, "step": 0.2}}
    })"));
    const auto out = run_p2(cfg);
    const auto &csv = file(out, "p2_modes.csv").content;
    CHECK(first_line(csv) == "beta,rate_m1,rate_m2,rate_m3,best_m");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
    const auto doc = json::parse(file(out, "p2.json").content);
    std::set<std::size_t> winners;
    for (const auto &row : doc["sweep"])
        winners.insert(row["best_m"].get<std::size_t>());
    CHECK(winners.size() >= 2);

    CHECK_THROWS_AS(run_p2(parse_config(json::parse(R"({"scenario": {"path_gain_sq": [1], "loading": [1]}})"))),
                    ConfigError);
}

TEST_CASE("p3 trace and winner")
{
    const auto cfg = parse_config(five_group_doc());
    const auto out = run_p3(cfg);
    const auto doc = json::parse(file(out, "p3.json").content);
    CHECK(doc["winner"]["mode_m"] == 2);
    CHECK(std::abs(doc["winner"]["rate"].get<double>() - 0.82302) <= 5e-4);
    CHECK(std::abs(doc["winner"]["loadings"][1].get<double>() - 0.6393) <= 1e-3);
    CHECK(doc["trace"].size() == 5);
    CHECK(first_line(file(out, "p3_trace.csv").content) ==
          "iteration,M,skipped,solved_beta_m,beta_m,beta_star,rate,eta");
    CHECK(first_line(file(out, "p3_candidates.csv").content) == "M,beta_star,rho_star,rate");

    auto d2 = five_group_doc();
    d2["solver"]["log_base"] = "2";
    const auto bits = json::parse(file(run_p3(parse_config(d2)), "p3.json").content);
    CHECK(bits["log_base"] == "2");
    CHECK(bits["winner"]["rate"].get<double>() ==
          doctest::Approx(doc["winner"]["rate"].get<double>() / std::numbers::ln2).epsilon(1e-14));

    auto single = five_group_doc();
    single["scenario"]["beta_max"] = json::array({0.4, 0, 0, 0, 0});
    CHECK(json::parse(file(run_p3(parse_config(single)), "p3.json").content)["winner"]["mode_m"] == 1);
}

TEST_CASE("output format selection")
{
    auto d = five_group_doc();
    d["output"]["format"] = "csv";
    for (const auto &f : run_p3(parse_config(d)))
        CHECK(f.name.ends_with(".csv"));
    d["output"]["format"] = "json";
    const auto j = run_p3(parse_config(d));
    REQUIRE(j.size() == 1);
    CHECK(j[0].name == "p3.json");
}

TEST_CASE("validation report and tolerance override")
{
    const auto rep = run_validate(parse_config(five_group_doc()));
    CHECK(rep.all_passed);
    const auto doc = json::parse(file(rep.files, "validate.json").content);
    bool found = false;
    for (const auto &c : doc["checks"])
        if (c["check"] == "p3_grid_beta")
        {
            found = true;
            CHECK(c["measured"].get<double>() == doctest::Approx(0.739).epsilon(1e-9));
            CHECK(c["pass"] == true);
        }
    CHECK(found);
    CHECK(first_line(file(rep.files, "validate.csv").content) == "check,measured,reference,delta,tolerance,pass");

    auto tight = five_group_doc();
    tight["validate"]["tolerance"] = 1e-12;
    const auto rep2 = run_validate(parse_config(tight));
    CHECK(!rep2.all_passed);
    const auto doc2 = json::parse(file(rep2.files, "validate.json").content);
    CHECK(doc2["tolerance"].get<double>() == 1e-12);
}

TEST_CASE("convergence column decreases")
{
    const auto cfg = parse_config(json::parse(R"({
        "scenario": {"path_gain_sq": [1, 0.25], "loading": [0.5, 0.5], "snr_db": 10},
        "mc": {"sizes": [16, 64, 256], "convergence_trials": 60, "seed": 2}
    })"));
    const auto rep = run_validate(cfg);
    CHECK(rep.all_passed);
    const auto doc = json::parse(file(rep.files, "validate.json").content);
    std::vector<double> dev;
    for (const auto &c : doc["checks"])
        if (c["check"].get<std::string>().starts_with("mc_convergence"))
            dev.push_back(c["measured"].get<double>());
    REQUIRE(dev.size() == 3);
    CHECK(dev[0] > dev[1]);
    CHECK(dev[1] > dev[2]);
}

TEST_CASE("mc output is reproducible byte for byte")
{
    const auto doc = json::parse(R"({
        "scenario": {"path_gain_sq": [1, 0.25], "loading": [0.5, 0.5], "snr_db": 10},
        "mc": {"antennas": 8, "trials": 30, "seed": 77}
    })");
    const auto a = run_mc(parse_config(doc));
    const auto b = run_mc(parse_config(doc));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].content == b[i].content);
    CHECK(first_line(file(a, "mc_trials.csv").content) == "snr_db,trial,sum_rate");

    auto other = doc;
    other["mc"]["seed"] = 78;
    CHECK(file(run_mc(parse_config(other)), "mc_trials.csv").content != file(a, "mc_trials.csv").content);
}

TEST_CASE("command line: errors leave no files, reruns are identical")
{
    const auto dir = scratch("cli");
    {
        std::ofstream(dir / "bad.json") << R"({"scenario": {"path_gain_sq": [1], "loading": [1], "typo": 1}})";
        std::ofstream(dir / "broken.json") << R"({"scenario": )";
        std::ofstream(dir / "domain.json") << R"({"scenario": {"path_gain_sq": [1], "loading": [1]}})";
        std::ofstream(dir / "good.json") << five_group_doc().dump();
    }
    CHECK(run_cli("p1 --config " + (dir / "bad.json").string() + " --out " + (dir / "o_bad").string()) != 0);
    CHECK(!fs::exists(dir / "o_bad"));
    CHECK(run_cli("p1 --config " + (dir / "broken.json").string() + " --out " + (dir / "o_broken").string()) != 0);
    CHECK(!fs::exists(dir / "o_broken"));
    CHECK(run_cli("p3 --config " + (dir / "domain.json").string() + " --out " + (dir / "o_dom").string()) != 0);
    CHECK(!fs::exists(dir / "o_dom"));
    CHECK(run_cli("p1 --config " + (dir / "missing.json").string()) != 0);
    {
        std::ofstream(dir / "few.json")
            << R"({"scenario": {"path_gain_sq": [1, 0.5], "loading": [0.9, 0.05]}, "mc": {"antennas": 4}})";
    }
    CHECK(run_cli("mc --config " + (dir / "few.json").string() + " --out " + (dir / "o_few").string()) != 0);
    CHECK(!fs::exists(dir / "o_few"));

    CHECK(run_cli("p3 --config " + (dir / "good.json").string() + " --out " + (dir / "a").string()) == 0);
    std::vector<std::string> first;
    for (const char *name : {"p3.json", "p3_trace.csv", "p3_candidates.csv"})
        first.push_back(slurp(dir / "a" / name));
    CHECK(run_cli("p3 --config " + (dir / "good.json").string() + " --out " + (dir / "a").string()) == 0);
    std::size_t i = 0;
    for (const char *name : {"p3.json", "p3_trace.csv", "p3_candidates.csv"})
    {
        CHECK(!first[i].empty());
        CHECK(slurp(dir / "a" / name) == first[i]);
        ++i;
    }

    CHECK(run_cli("validate --config " + (dir / "good.json").string() + " --out " + (dir / "v").string() +
                  " --tol 1e-12") == 2);
    const auto rep = json::parse(slurp(dir / "v" / "validate.json"));
    CHECK(rep["tolerance"].get<double>() == 1e-12);

    CHECK(run_cli("p3 --config " + (dir / "good.json").string() + " --out " + (dir / "e").string() +
                  " --early-break --log-base 2") == 0);
    const auto eb = json::parse(slurp(dir / "e" / "p3.json"));
    CHECK(eb["early_break"] == true);
    CHECK(eb["log_base"] == "2");
}

} // TEST_SUITE
