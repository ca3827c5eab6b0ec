// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and the result documents behind the rcialloc commands.
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

#ifndef RCI_EXPERIMENTS_HPP
#define RCI_EXPERIMENTS_HPP

#include "rci/asymptotics.hpp"
#include "rci/multimode.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rci
{

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class LogBase
{
    natural,
    two
};

struct Sweep
{
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    // Inclusive; points are start + i * step.
    std::vector<double> values() const;
};

struct ExperimentConfig
{
    // scenario, in the caller's group order
    std::vector<double> path_gain_sq;
    std::vector<double> loading;
    std::vector<double> beta_max;
    double snr_db = 10.0;
    std::optional<Sweep> snr_db_sweep;
    std::optional<Sweep> beta_sweep;

    // solver
    MultimodeOptions solver;
    bool early_break = false;
    LogBase log_base = LogBase::natural;
    double p3_grid_step = 0.001;

    // mc
    bool has_mc = false;
    std::size_t antennas = 8;
    std::size_t trials = 500;
    std::uint64_t seed = 1;
    double power_grid_step = 0.01;
    std::vector<std::size_t> convergence_sizes{16, 64, 256};
    std::size_t convergence_trials = 200;

    // validate
    double tolerance = 5e-4;

    // output
    std::string out_dir = "out";
    std::string format = "both";  // csv | json | both

    nlohmann::json document;  // normalized input, basis of the config hash

    std::vector<double> snr_points_db() const;
    std::string hash() const;
};

// Throws ConfigError on unknown keys, missing fields or out-of-domain values.
ExperimentConfig parse_config(const nlohmann::json &doc);
ExperimentConfig load_config(const std::string &path);

// Path-gain rules: "1/j^k" (k > 0) or "1".
std::vector<double> path_gain_rule(const std::string &rule, std::size_t groups);

struct OutputFile
{
    std::string name;
    std::string content;
};

// Each command computes every result in memory; nothing touches disk until write_outputs.
std::vector<OutputFile> run_p1(const ExperimentConfig &cfg);
std::vector<OutputFile> run_p2(const ExperimentConfig &cfg);
std::vector<OutputFile> run_p3(const ExperimentConfig &cfg);
std::vector<OutputFile> run_mc(const ExperimentConfig &cfg);

struct ValidationReport
{
    std::vector<OutputFile> files;
    bool all_passed = true;
};
ValidationReport run_validate(const ExperimentConfig &cfg);

void write_outputs(const std::string &dir, const std::vector<OutputFile> &files);

// Golden-section maximizer of rho -> R(rho, waterfill(rho)) on [lo, hi].
double golden_section_rho(const Scenario &scenario, double lo, double hi, double tol = 1e-10);

std::string format_number(double v);

} // namespace rci

#endif
