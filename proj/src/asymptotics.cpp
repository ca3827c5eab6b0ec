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

#include "rci/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rci
{

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

Scenario::Scenario(std::vector<double> path_gain_sq, std::vector<double> loading, double snr)
    : path_gain_sq_(std::move(path_gain_sq)), loading_(std::move(loading)), snr_(snr), beta_total_(0.0)
{
    if (path_gain_sq_.empty())
        throw std::invalid_argument("Scenario needs at least one group.");
    if (path_gain_sq_.size() != loading_.size())
        throw std::invalid_argument("Scenario: path_gain_sq and loading differ in length.");
    if (!(snr_ > 0.0) || !std::isfinite(snr_))
        throw std::invalid_argument("Scenario: snr must be positive and finite.");

    for (std::size_t j = 0; j < path_gain_sq_.size(); ++j)
    {
        if (!(path_gain_sq_[j] > 0.0) || !std::isfinite(path_gain_sq_[j]))
            throw std::invalid_argument("Scenario: path gain of group " + std::to_string(j + 1) + " must be positive.");
        if (!(loading_[j] >= 0.0) || !std::isfinite(loading_[j]))
            throw std::invalid_argument("Scenario: loading of group " + std::to_string(j + 1) + " must be non-negative.");
        if (j > 0 && path_gain_sq_[j] > path_gain_sq_[j - 1])
            throw std::invalid_argument("Scenario: path gains must be sorted non-increasing (use Scenario::sorted).");
        beta_total_ += loading_[j];
    }
    if (!(beta_total_ > 0.0))
        throw std::invalid_argument("Scenario: total loading must be positive.");

    gamma_.resize(path_gain_sq_.size());
    for (std::size_t j = 0; j < gamma_.size(); ++j)
        gamma_[j] = snr_ * path_gain_sq_[j];

    order_.resize(path_gain_sq_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
}

Scenario Scenario::sorted(std::span<const double> path_gain_sq, std::span<const double> loading, double snr)
{
    if (path_gain_sq.size() != loading.size())
        throw std::invalid_argument("Scenario: path_gain_sq and loading differ in length.");

    std::vector<std::size_t> idx(path_gain_sq.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return path_gain_sq[a] > path_gain_sq[b]; });

    std::vector<double> a2, b;
    for (auto i : idx)
    {
        a2.push_back(path_gain_sq[i]);
        b.push_back(loading[i]);
    }
    Scenario s(std::move(a2), std::move(b), snr);
    s.order_ = std::move(idx);
    return s;
}

Scenario Scenario::with_loading(std::vector<double> loading) const
{
    Scenario s(path_gain_sq_, std::move(loading), snr_);
    s.order_ = order_;
    return s;
}

std::vector<std::size_t> Scenario::active_groups() const
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < loading_.size(); ++j)
        if (loading_[j] > 0.0)
            out.push_back(j);
    return out;
}

double solve_g(double beta, double rho)
{
    if (!(rho > 0.0))
        throw std::domain_error("solve_g: rho must be positive.");
    if (!(beta > 0.0))
        throw std::domain_error("solve_g: beta must be positive.");

    // rho g^2 + (rho + beta - 1) g - 1 = 0; pick the cancellation-free form of the positive root.
    const double b = rho + beta - 1.0;
    const double disc = std::sqrt(b * b + 4.0 * rho);
    if (b >= 0.0)
        return 2.0 / (b + disc);
    return (disc - b) / (2.0 * rho);
}

double dg_drho(double beta, double rho, double g)
{
    const double s = (1.0 + g) * (1.0 + g);
    return -g * s / (beta + rho * s);
}

double eff_gain(double gamma_j, double beta, double rho, double g)
{
    const double s = (1.0 + g) * (1.0 + g);
    return g * (gamma_j + gamma_j * rho / beta * s) / (gamma_j + s);
}

double df_drho(double gamma_j, double beta, double rho, double g)
{
    const double f = eff_gain(gamma_j, beta, rho, g);
    const double d = 1.0 + rho / beta * (1.0 + g) * (1.0 + g);
    return f * f * 2.0 * (1.0 / g + 1.0) / (d * d) * (rho / beta - 1.0 / gamma_j) * dg_drho(beta, rho, g);
}

double df_dbeta(double gamma_j, double beta, double rho, double g)
{
    const double f = eff_gain(gamma_j, beta, rho, g);
    const double s = (1.0 + g) * (1.0 + g);
    const double d = 1.0 + rho / beta * s;
    const double tail = 2.0 * g * s * (rho / beta * gamma_j - 1.0) / ((gamma_j + s) * d * d);
    return -f / beta * (1.0 + g / d + tail);
}

AsymptoticState evaluate_state(const Scenario &scenario, double rho)
{
    AsymptoticState st;
    st.beta = scenario.beta_total();
    st.rho = rho;
    st.g = solve_g(st.beta, rho);
    st.f.reserve(scenario.groups());
    for (double gm : scenario.gamma())
        st.f.push_back(eff_gain(gm, st.beta, rho, st.g));
    return st;
}

double limiting_sum_rate(const Scenario &scenario, std::span<const double> p_bar, const AsymptoticState &state)
{
    if (p_bar.size() != scenario.groups())
        throw std::invalid_argument("limiting_sum_rate: power vector has wrong length.");
    double rate = 0.0;
    for (std::size_t j = 0; j < p_bar.size(); ++j)
    {
        if (!(p_bar[j] >= 0.0))
            throw std::domain_error("limiting_sum_rate: negative power for group " + std::to_string(j + 1) + ".");
        if (scenario.loading()[j] > 0.0)
            rate += scenario.loading()[j] * std::log1p(p_bar[j] * state.f[j]);
    }
    return rate;
}

double limiting_sum_rate(const Scenario &scenario, std::span<const double> p_bar, double rho)
{
    return limiting_sum_rate(scenario, p_bar, evaluate_state(scenario, rho));
}

} // namespace rci
