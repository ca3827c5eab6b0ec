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

#include "rci/rho_opt.hpp"

#include <stdexcept>
#include <vector>

namespace rci
{

double rho_stationarity(const Scenario &scenario, double rho, const PowerAllocation &alloc)
{
    const auto st = evaluate_state(scenario, rho);
    const double beta = st.beta;
    double sum = 0.0;
    for (std::size_t j = 0; j < scenario.groups(); ++j)
    {
        const double bj = scenario.loading()[j];
        const double p = alloc.p_bar[j];
        if (!(bj > 0.0) || !(p > 0.0))
            continue;
        const double f = st.f[j];
        sum += bj * p * f * f / (1.0 + p * f) * (rho / beta - 1.0 / scenario.gamma()[j]);
    }
    return sum;
}

namespace
{

struct Eval
{
    double rho;
    double phi;
};

Eval eval_phi(const Scenario &s, double rho)
{
    return {rho, rho_stationarity(s, rho, waterfill(s, rho))};
}

P1Solution finish(const Scenario &s, double rho)
{
    P1Solution out;
    out.rho_star = rho;
    out.state = evaluate_state(s, rho);
    out.alloc = waterfill(s, out.state);
    out.rate = limiting_sum_rate(s, out.alloc.p_bar, out.state);
    out.residual = rho_stationarity(s, rho, out.alloc);
    return out;
}

double bisect(const Scenario &s, Eval lo, Eval hi, double tol)
{
    while (hi.rho - lo.rho > tol)
    {
        const double mid = 0.5 * (lo.rho + hi.rho);
        if (mid <= lo.rho || mid >= hi.rho)
            break;
        const Eval m = eval_phi(s, mid);
        if (m.phi == 0.0)
            return mid;
        if ((m.phi < 0.0) == (lo.phi < 0.0))
            lo = m;
        else
            hi = m;
    }
    return 0.5 * (lo.rho + hi.rho);
}

} // namespace

P1Solution solve_p1(const Scenario &scenario, const P1Options &opts)
{
    if (opts.grid_points < 1)
        throw std::invalid_argument("solve_p1: grid_points must be at least 1.");

    const auto active = scenario.active_groups();
    const double beta = scenario.beta_total();
    const double lo = beta / scenario.gamma()[active.front()];
    const double hi = beta / scenario.gamma()[active.back()];

    if (!(hi > lo))
    {
        auto sol = finish(scenario, lo);
        sol.rho_lo = lo;
        sol.rho_hi = hi;
        return sol;
    }

    const std::size_t n = opts.grid_points;
    std::vector<Eval> grid;
    grid.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
    {
        const double rho = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        grid.push_back(eval_phi(scenario, rho));
    }

    std::vector<double> candidates{lo, hi};
    std::size_t roots = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const Eval &a = grid[i];
        const Eval &b = grid[i + 1];
        if (a.phi == 0.0 && i > 0)
        {
            candidates.push_back(a.rho);
            ++roots;
        }
        else if ((a.phi < 0.0 && b.phi > 0.0) || (a.phi > 0.0 && b.phi < 0.0))
        {
            candidates.push_back(bisect(scenario, a, b, opts.rho_tol));
            ++roots;
        }
    }

    // Deterministic pick: highest rate, first candidate on exact ties.
    P1Solution best = finish(scenario, candidates.front());
    for (std::size_t i = 1; i < candidates.size(); ++i)
    {
        auto sol = finish(scenario, candidates[i]);
        if (sol.rate > best.rate)
            best = std::move(sol);
    }
    best.rho_lo = lo;
    best.rho_hi = hi;
    best.roots_found = roots;
    if (roots == 0)
        best.diagnostic = "no sign change of the rho stationarity sum on the interval; endpoints compared directly";
    return best;
}

} // namespace rci
