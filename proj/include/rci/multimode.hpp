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

#ifndef RCI_MULTIMODE_HPP
#define RCI_MULTIMODE_HPP

#include "rci/asymptotics.hpp"
#include "rci/rho_opt.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace rci
{

// Per-group loading caps beta_{j,max}, in the scenario's sorted group order.
struct LoadingBounds
{
    std::vector<double> beta_max;

    void validate(std::size_t groups) const;
};

struct MultimodeOptions
{
    P1Options p1;
    std::size_t beta_scan_points = 33;  // pre-scan of the last group's loading
    double eta_tol = 1e-9;               // |eta| below this counts as zero
    double eta_root_tol = 1e-8;          // target |eta_M| at an interior loading root
    double rate_tie_tol = 1e-9;          // near-equal modes resolve to the smaller M
};

// A served-group configuration and its jointly optimal power / regularization.
struct ModeSolution
{
    std::size_t mode_m = 0;             // served groups are 0..mode_m-1
    std::vector<double> loadings;       // length L, zero beyond mode_m
    double beta_star = 0.0;
    P1Solution p1;
    double mu = 0.0;
    double eta_m = 0.0;                 // multiplier of the last served group's loading
    double lambda = 0.0;

    std::vector<std::size_t> served() const;
    double rate() const { return p1.rate; }
};

// Build a ModeSolution for explicit loadings (mode_m = number of leading groups considered).
ModeSolution solve_with_loadings(const Scenario &base, std::vector<double> loadings, std::size_t mode_m,
                                 const MultimodeOptions &opts = {});

// Binary loading: serve groups 1..m fully. Requires non-increasing caps.
ModeSolution solve_mode_binary(const Scenario &base, const LoadingBounds &bounds, std::size_t m,
                               const MultimodeOptions &opts = {});

// Best binary mode over m = 1..L.
ModeSolution solve_p2(const Scenario &base, const LoadingBounds &bounds, const MultimodeOptions &opts = {});

// Loading multiplier at a converged P1 point: -lambda [1 + g / (1 + (rho/beta)(1+g)^2)].
double mu_at_optimum(double beta_star, double rho_star, double lambda, double g);

// eta_k = log(1 + p_k f_k) - lambda (p_k - 1) + mu for group k (0-based) of the solution.
double eta_of_group(const ModeSolution &sol, std::size_t k);
double eta_last(const ModeSolution &sol);
std::vector<double> eta_values(const ModeSolution &sol);

struct BetaMResult
{
    double beta_m = 0.0;
    ModeSolution solution;
    bool interior_root = false;
    std::string diagnostic;
};

// Loading of group M (1-based) such that eta_M = 0 with groups 1..M-1 at their caps.
// Returns the cap if eta_M >= 0 there, and 0 if eta_M never changes sign.
BetaMResult solve_beta_M(const Scenario &base, const LoadingBounds &bounds, std::size_t M,
                         const MultimodeOptions &opts = {});

// One iteration of the fractional-loading search.
struct P3Iteration
{
    std::size_t j = 0;               // groups considered at full load (1-based)
    std::size_t M = 0;               // groups with positive power
    bool skipped = false;            // M already seen
    std::vector<double> eta;         // eta_1..eta_M before the last group's loading is adjusted
    bool solved_beta_m = false;
    double beta_m = 0.0;
    std::vector<double> loadings;
    double beta_star = 0.0;
    double rate = 0.0;
};

struct P3Result
{
    ModeSolution best;
    std::vector<P3Iteration> trace;
    std::vector<ModeSolution> candidates;  // one per distinct M, in discovery order
};

// Fractional loading: iterate j = 1..L, find the powered prefix M, fix the last group's loading
// from its stationarity condition, and keep the best mode. early_break stops after the first
// iteration whose eta_M is negative.
P3Result solve_p3(const Scenario &base, const LoadingBounds &bounds, bool early_break,
                  const MultimodeOptions &opts = {});

// Prefix loading of total beta: caps filled in group order, the last one partially.
std::vector<double> prefix_loading(const LoadingBounds &bounds, double beta);

struct BruteForceResult
{
    double beta = 0.0;
    double rate = 0.0;
    std::vector<double> betas;  // every grid point, for plotting
    std::vector<double> rates;
};

// Grid search over the total loading with prefix-shaped loadings.
BruteForceResult brute_force_p3(const Scenario &base, const LoadingBounds &bounds, double grid_step,
                                const P1Options &opts = {});

} // namespace rci

#endif
