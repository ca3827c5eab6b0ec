// SPDX-License-Identifier: Apache-2.0
//
// Finite-size RCI link model: i.i.d. Rayleigh channels, precoder power normalization and
// per-user SINR, used to check the large-system formulas at practical N.
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

#ifndef RCI_FINITE_MC_HPP
#define RCI_FINITE_MC_HPP

#include "rci/asymptotics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rci
{

// Users per group for N antennas, K_j ~ beta_j N by largest-remainder rounding.
// Throws if a loaded group would get no users.
std::vector<std::size_t> users_per_group(std::span<const double> loading, std::size_t n_antennas);

struct ChannelBatch
{
    std::size_t n_antennas = 0;
    std::size_t n_users = 0;
    std::vector<std::size_t> group_of_user;  // users are laid out group by group
    Eigen::MatrixXcd matrix;                 // K x N, row k is h_k
    std::uint64_t seed = 0;
    std::uint64_t trial_index = 0;
};

// Entries are CN(0, 1). The generator state depends only on (seed, trial).
ChannelBatch sample_channel(std::size_t n_antennas, const Scenario &scenario, std::uint64_t seed,
                            std::uint64_t trial);

// Channel-only quantities of the RCI precoder for a given alpha = N rho.
// Powers enter only through cheap O(K^2) sums, so one kernel serves a whole power grid.
class SinrKernel
{
public:
    SinrKernel(const ChannelBatch &channel, double rho);

    std::size_t users() const { return static_cast<std::size_t>(cross_.rows()); }

    // |h_k A^-1 h_j^H|^2, A = H^H H + alpha I.
    const Eigen::MatrixXd &cross_gain() const { return cross_; }
    // ||A^-1 h_k^H||^2 = [H A^-2 H^H]_kk.
    const Eigen::VectorXd &precoder_norm() const { return norm_; }

    // tr(Lambda H A^-2 H^H) for per-user powers.
    double power_trace(std::span<const double> user_power) const;

    // Per-user SINR; a_sq are per-user path gains, pd the transmit power, noise sigma^2.
    std::vector<double> sinr(std::span<const double> user_power, std::span<const double> a_sq, double pd,
                             double noise, double *c_sq = nullptr) const;

private:
    Eigen::MatrixXd cross_;
    Eigen::VectorXd norm_;
};

struct FiniteSinrReport
{
    std::vector<double> sinr;
    double c_sq = 0.0;
    double sum_rate = 0.0;  // (1/N) sum_k log(1 + SINR_k), natural log
    std::vector<double> group_mean_sinr;
};

// Per-user power is p_bar of the user's group; sigma^2 = 1 and P_d = scenario.snr().
FiniteSinrReport finite_sinr(const ChannelBatch &channel, std::span<const double> p_bar_per_group, double rho,
                             const Scenario &scenario);

struct McEstimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> per_trial;
};

McEstimate mc_expected_sum_rate(const Scenario &scenario, std::size_t n_antennas, std::span<const double> p_bar,
                                double rho, std::size_t n_trials, std::uint64_t seed);

struct PowerGridResult
{
    std::vector<double> p_bar;
    double rate = 0.0;
    std::size_t points = 0;
};

// Exhaustive search over sum_j beta_j p_j = beta on a grid of step grid_step in p_1 (and p_2 for L = 3).
PowerGridResult finite_opt_power_grid(const ChannelBatch &channel, const Scenario &scenario, double rho,
                                      double grid_step, std::size_t max_points = 2'000'000);

// Average finite-size rate with a fixed allocation versus the per-realization best grid
// allocation, on the same channel draws.
struct AllocationComparison
{
    McEstimate fixed;      // p_bar held fixed across realizations
    McEstimate grid_best;  // finite_opt_power_grid per realization
    double relative_gap = 0.0;  // (grid_best - fixed) / grid_best
};

AllocationComparison compare_power_allocations(const Scenario &scenario, std::size_t n_antennas,
                                               std::span<const double> p_bar, double rho, std::size_t n_trials,
                                               std::uint64_t seed, double grid_step);

// Relative deviation of finite per-user SINR from the large-system limit p_j f_j.
struct SinrDeviation
{
    std::size_t n_antennas = 0;
    double trial_averaged = 0.0;   // mean_k |E_trials[SINR_k] - limit| / limit
    double per_realization = 0.0;  // mean_{k,trial} |SINR_k - limit| / limit
};

SinrDeviation sinr_deviation(const Scenario &scenario, std::size_t n_antennas, std::span<const double> p_bar,
                             double rho, std::size_t n_trials, std::uint64_t seed);

} // namespace rci

#endif
