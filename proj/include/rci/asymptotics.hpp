// SPDX-License-Identifier: Apache-2.0
//
// Large-system limits for regularized channel inversion (RCI) precoding in a
// multiuser MISO broadcast channel with users clustered into path-gain groups.
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

#ifndef RCI_ASYMPTOTICS_HPP
#define RCI_ASYMPTOTICS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace rci
{

double db_to_linear(double db);

// Static problem instance: L user groups with per-group path gain a_j^2,
// loading beta_j = K_j / N and transmit SNR P_d / sigma^2.
//
// Groups are kept sorted by non-increasing path gain. Use Scenario::sorted()
// for unsorted input; the constructor rejects it.
class Scenario
{
public:
    Scenario(std::vector<double> path_gain_sq, std::vector<double> loading, double snr);

    // Stable sort by decreasing path gain; order() maps sorted position to input index.
    static Scenario sorted(std::span<const double> path_gain_sq, std::span<const double> loading, double snr);

    std::size_t groups() const { return path_gain_sq_.size(); }
    const std::vector<double> &path_gain_sq() const { return path_gain_sq_; }
    const std::vector<double> &loading() const { return loading_; }
    const std::vector<double> &gamma() const { return gamma_; }
    const std::vector<std::size_t> &order() const { return order_; }
    double snr() const { return snr_; }
    double beta_total() const { return beta_total_; }

    // Same path gains and SNR, new loadings (entries may be zero, sum must be positive).
    Scenario with_loading(std::vector<double> loading) const;

    // Indices of groups with positive loading, in sorted order.
    std::vector<std::size_t> active_groups() const;

private:
    std::vector<double> path_gain_sq_;
    std::vector<double> loading_;
    std::vector<double> gamma_;
    std::vector<std::size_t> order_;
    double snr_;
    double beta_total_;
};

// Unique positive root of g = (rho + beta / (1 + g))^-1.
double solve_g(double beta, double rho);

// d g / d rho at the fixed point g = solve_g(beta, rho). Always negative.
double dg_drho(double beta, double rho, double g);

// Effective gain f_j: limiting SINR of a group-j user per unit normalized power.
double eff_gain(double gamma_j, double beta, double rho, double g);

double df_drho(double gamma_j, double beta, double rho, double g);
double df_dbeta(double gamma_j, double beta, double rho, double g);

// Evaluated large-system point (beta, rho, g, f_1..f_L).
struct AsymptoticState
{
    double beta = 0.0;
    double rho = 0.0;
    double g = 0.0;
    std::vector<double> f;
};

// f is computed for every group, including those with zero loading.
AsymptoticState evaluate_state(const Scenario &scenario, double rho);

// sum_j beta_j log(1 + p_j f_j), natural log. Groups with zero loading contribute nothing.
double limiting_sum_rate(const Scenario &scenario, std::span<const double> p_bar, double rho);
double limiting_sum_rate(const Scenario &scenario, std::span<const double> p_bar, const AsymptoticState &state);

} // namespace rci

#endif
