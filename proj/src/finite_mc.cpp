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

#include "rci/finite_mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace rci
{

std::vector<std::size_t> users_per_group(std::span<const double> loading, std::size_t n_antennas)
{
    if (n_antennas < 1)
        throw std::invalid_argument("users_per_group: need at least one antenna.");

    const double n = static_cast<double>(n_antennas);
    const double beta = std::accumulate(loading.begin(), loading.end(), 0.0);
    const auto target = static_cast<std::size_t>(std::llround(beta * n));

    std::vector<std::size_t> k(loading.size());
    std::vector<double> frac(loading.size());
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < loading.size(); ++j)
    {
        const double q = loading[j] * n;
        k[j] = static_cast<std::size_t>(std::floor(q));
        frac[j] = q - std::floor(q);
        assigned += k[j];
    }

    // Largest remainder, lower index first on ties.
    std::vector<std::size_t> idx(loading.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < target && i < idx.size(); ++i)
    {
        if (loading[idx[i]] > 0.0)
        {
            ++k[idx[i]];
            ++assigned;
        }
    }

    for (std::size_t j = 0; j < loading.size(); ++j)
        if (loading[j] > 0.0 && k[j] == 0)
            throw std::domain_error("users_per_group: group " + std::to_string(j + 1) + " gets no users at N = " +
                                    std::to_string(n_antennas) + " (needs N >= 1/beta_j).");
    return k;
}

ChannelBatch sample_channel(std::size_t n_antennas, const Scenario &scenario, std::uint64_t seed, std::uint64_t trial)
{
    const auto counts = users_per_group(scenario.loading(), n_antennas);

    ChannelBatch ch;
    ch.n_antennas = n_antennas;
    ch.seed = seed;
    ch.trial_index = trial;
    for (std::size_t j = 0; j < counts.size(); ++j)
        ch.group_of_user.insert(ch.group_of_user.end(), counts[j], j);
    ch.n_users = ch.group_of_user.size();

    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> half(0.0, std::sqrt(0.5));

    ch.matrix.resize(static_cast<Eigen::Index>(ch.n_users), static_cast<Eigen::Index>(n_antennas));
    for (Eigen::Index k = 0; k < ch.matrix.rows(); ++k)
        for (Eigen::Index n = 0; n < ch.matrix.cols(); ++n)
        {
            const double re = half(gen);
            const double im = half(gen);
            ch.matrix(k, n) = {re, im};
        }
    return ch;
}

SinrKernel::SinrKernel(const ChannelBatch &channel, double rho)
{
    if (!(rho > 0.0))
        throw std::domain_error("SinrKernel: rho must be positive.");
    const auto &H = channel.matrix;
    const Eigen::Index N = H.cols();
    const double alpha = static_cast<double>(N) * rho;

    Eigen::MatrixXcd A = H.adjoint() * H;
    A.diagonal().array() += alpha;
    Eigen::LLT<Eigen::MatrixXcd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("SinrKernel: H^H H + alpha I is not numerically positive definite.");

    const Eigen::MatrixXcd W = llt.solve(H.adjoint());  // N x K
    const Eigen::MatrixXcd G = H * W;                   // K x K
    cross_ = G.cwiseAbs2();
    norm_ = W.colwise().squaredNorm().transpose();
}

double SinrKernel::power_trace(std::span<const double> user_power) const
{
    double t = 0.0;
    for (std::size_t k = 0; k < user_power.size(); ++k)
        t += user_power[k] * norm_(static_cast<Eigen::Index>(k));
    return t;
}

std::vector<double> SinrKernel::sinr(std::span<const double> user_power, std::span<const double> a_sq, double pd,
                                     double noise, double *c_sq) const
{
    const std::size_t K = users();
    if (user_power.size() != K || a_sq.size() != K)
        throw std::invalid_argument("SinrKernel::sinr: per-user vectors have wrong length.");

    const double trace = power_trace(user_power);
    if (!(trace > 0.0))
        throw std::domain_error("SinrKernel::sinr: all user powers are zero.");
    const double c2 = pd / trace;
    if (c_sq)
        *c_sq = c2;

    const Eigen::Map<const Eigen::VectorXd> p(user_power.data(), static_cast<Eigen::Index>(K));
    const Eigen::VectorXd received = cross_ * p;

    std::vector<double> out(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        const auto i = static_cast<Eigen::Index>(k);
        const double own = p(i) * cross_(i, i);
        const double interference = std::max(0.0, received(i) - own);
        out[k] = c2 * a_sq[k] * own / (c2 * a_sq[k] * interference + noise);
    }
    return out;
}

namespace
{

struct UserVectors
{
    std::vector<double> power;
    std::vector<double> a_sq;
};

UserVectors user_vectors(const ChannelBatch &channel, std::span<const double> p_bar, const Scenario &scenario)
{
    if (p_bar.size() != scenario.groups())
        throw std::invalid_argument("power vector length does not match the number of groups.");
    UserVectors u;
    for (std::size_t g : channel.group_of_user)
    {
        if (!(p_bar[g] >= 0.0))
            throw std::domain_error("negative group power.");
        u.power.push_back(p_bar[g]);
        u.a_sq.push_back(scenario.path_gain_sq()[g]);
    }
    return u;
}

double rate_of(std::span<const double> sinr, std::size_t n_antennas)
{
    double r = 0.0;
    for (double s : sinr)
        r += std::log1p(s);
    return r / static_cast<double>(n_antennas);
}

} // namespace

FiniteSinrReport finite_sinr(const ChannelBatch &channel, std::span<const double> p_bar_per_group, double rho,
                             const Scenario &scenario)
{
    const SinrKernel kernel(channel, rho);
    const auto u = user_vectors(channel, p_bar_per_group, scenario);

    FiniteSinrReport rep;
    rep.sinr = kernel.sinr(u.power, u.a_sq, scenario.snr(), 1.0, &rep.c_sq);
    rep.sum_rate = rate_of(rep.sinr, channel.n_antennas);

    rep.group_mean_sinr.assign(scenario.groups(), 0.0);
    std::vector<std::size_t> count(scenario.groups(), 0);
    for (std::size_t k = 0; k < rep.sinr.size(); ++k)
    {
        rep.group_mean_sinr[channel.group_of_user[k]] += rep.sinr[k];
        ++count[channel.group_of_user[k]];
    }
    for (std::size_t j = 0; j < count.size(); ++j)
        if (count[j] > 0)
            rep.group_mean_sinr[j] /= static_cast<double>(count[j]);
    return rep;
}

namespace
{

void summarize(McEstimate &est)
{
    const double n = static_cast<double>(est.per_trial.size());
    est.mean = std::accumulate(est.per_trial.begin(), est.per_trial.end(), 0.0) / n;
    est.std_error = 0.0;
    if (est.per_trial.size() > 1)
    {
        double ss = 0.0;
        for (double r : est.per_trial)
            ss += (r - est.mean) * (r - est.mean);
        est.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
}

} // namespace

McEstimate mc_expected_sum_rate(const Scenario &scenario, std::size_t n_antennas, std::span<const double> p_bar,
                                double rho, std::size_t n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
        throw std::invalid_argument("mc_expected_sum_rate: need at least one trial.");

    McEstimate est;
    est.per_trial.resize(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t)
    {
        const auto ch = sample_channel(n_antennas, scenario, seed, t);
        est.per_trial[t] = finite_sinr(ch, p_bar, rho, scenario).sum_rate;
    }
    summarize(est);

    return est;
}

PowerGridResult finite_opt_power_grid(const ChannelBatch &channel, const Scenario &scenario, double rho,
                                      double grid_step, std::size_t max_points)
{
    if (!(grid_step > 0.0))
        throw std::invalid_argument("finite_opt_power_grid: grid_step must be positive.");
    const auto active = scenario.active_groups();
    if (active.size() > 3)
        throw std::invalid_argument("finite_opt_power_grid: at most three loaded groups are supported.");

    const auto &b = scenario.loading();
    const double beta = scenario.beta_total();
    auto steps_for = [&](double budget, std::size_t j) {
        return static_cast<std::size_t>(std::floor(std::max(0.0, budget) / b[j] / grid_step + 1e-9));
    };

    std::size_t estimate = 1;
    if (active.size() >= 2)
        estimate = steps_for(beta, active[0]) + 1;
    if (active.size() == 3)
        estimate *= steps_for(beta, active[1]) + 1;
    if (estimate > max_points)
        throw std::length_error("finite_opt_power_grid: grid of " + std::to_string(estimate) +
                                " points exceeds the cap of " + std::to_string(max_points) + ".");

    const SinrKernel kernel(channel, rho);
    std::vector<double> a_sq;
    for (std::size_t g : channel.group_of_user)
        a_sq.push_back(scenario.path_gain_sq()[g]);

    PowerGridResult best;
    best.rate = -1.0;
    std::vector<double> p(scenario.groups(), 0.0);
    std::vector<double> user_power(channel.n_users);

    auto consider = [&]() {
        for (std::size_t k = 0; k < user_power.size(); ++k)
            user_power[k] = p[channel.group_of_user[k]];
        if (!(kernel.power_trace(user_power) > 0.0))
            return;
        ++best.points;
        const double r = rate_of(kernel.sinr(user_power, a_sq, scenario.snr(), 1.0), channel.n_antennas);
        if (r > best.rate)
        {
            best.rate = r;
            best.p_bar = p;
        }
    };

    if (active.size() == 1)
    {
        p[active[0]] = beta / b[active[0]];
        consider();
    }
    else
    {
        const std::size_t i0 = active[0];
        const std::size_t n0 = steps_for(beta, i0);
        for (std::size_t s0 = 0; s0 <= n0; ++s0)
        {
            p[i0] = static_cast<double>(s0) * grid_step;
            const double left0 = beta - b[i0] * p[i0];
            if (active.size() == 2)
            {
                p[active[1]] = std::max(0.0, left0 / b[active[1]]);
                consider();
                continue;
            }
            const std::size_t i1 = active[1], i2 = active[2];
            const std::size_t n1 = steps_for(left0, i1);
            for (std::size_t s1 = 0; s1 <= n1; ++s1)
            {
                p[i1] = static_cast<double>(s1) * grid_step;
                p[i2] = std::max(0.0, (left0 - b[i1] * p[i1]) / b[i2]);
                consider();
            }
        }
    }
    return best;
}

AllocationComparison compare_power_allocations(const Scenario &scenario, std::size_t n_antennas,
                                               std::span<const double> p_bar, double rho, std::size_t n_trials,
                                               std::uint64_t seed, double grid_step)
{
    if (n_trials < 1)
        throw std::invalid_argument("compare_power_allocations: need at least one trial.");

    AllocationComparison out;
    out.fixed.per_trial.resize(n_trials);
    out.grid_best.per_trial.resize(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t)
    {
        const auto ch = sample_channel(n_antennas, scenario, seed, t);
        out.fixed.per_trial[t] = finite_sinr(ch, p_bar, rho, scenario).sum_rate;
        out.grid_best.per_trial[t] = finite_opt_power_grid(ch, scenario, rho, grid_step).rate;
    }
    summarize(out.fixed);
    summarize(out.grid_best);
    out.relative_gap = (out.grid_best.mean - out.fixed.mean) / out.grid_best.mean;
    return out;
}

SinrDeviation sinr_deviation(const Scenario &scenario, std::size_t n_antennas, std::span<const double> p_bar,
                             double rho, std::size_t n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
        throw std::invalid_argument("sinr_deviation: need at least one trial.");
    const auto st = evaluate_state(scenario, rho);

    SinrDeviation out;
    out.n_antennas = n_antennas;
    std::vector<double> sums;
    std::vector<double> limit;
    double per_real = 0.0;
    std::size_t per_real_count = 0;

    for (std::size_t t = 0; t < n_trials; ++t)
    {
        const auto ch = sample_channel(n_antennas, scenario, seed, t);
        const auto rep = finite_sinr(ch, p_bar, rho, scenario);
        if (t == 0)
        {
            sums.assign(rep.sinr.size(), 0.0);
            for (std::size_t g : ch.group_of_user)
                limit.push_back(p_bar[g] * st.f[g]);
        }
        for (std::size_t k = 0; k < rep.sinr.size(); ++k)
        {
            if (!(limit[k] > 0.0))
                continue;
            sums[k] += rep.sinr[k];
            per_real += std::abs(rep.sinr[k] - limit[k]) / limit[k];
            ++per_real_count;
        }
    }

    double avg = 0.0;
    std::size_t users = 0;
    for (std::size_t k = 0; k < sums.size(); ++k)
    {
        if (!(limit[k] > 0.0))
            continue;
        avg += std::abs(sums[k] / static_cast<double>(n_trials) - limit[k]) / limit[k];
        ++users;
    }
    if (users == 0)
        throw std::domain_error("sinr_deviation: no user has positive limiting SINR.");
    out.trial_averaged = avg / static_cast<double>(users);
    out.per_realization = per_real / static_cast<double>(per_real_count);
    return out;
}

} // namespace rci
