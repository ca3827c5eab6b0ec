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

#include "rci/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rci
{

namespace
{
constexpr double boundary_tol = 1e-12;
}

PowerAllocation waterfill(const Scenario &scenario, const AsymptoticState &state)
{
    const auto active = scenario.active_groups();
    if (active.empty())
        throw std::invalid_argument("waterfill: infeasible scenario, all loadings are zero.");

    const auto &beta_j = scenario.loading();
    const double beta = scenario.beta_total();

    PowerAllocation out;
    out.p_bar.assign(scenario.groups(), 0.0);

    double sum_b = 0.0, sum_b_over_f = 0.0;
    for (std::size_t m = 1; m <= active.size(); ++m)
    {
        const std::size_t last = active[m - 1];
        sum_b += beta_j[last];
        sum_b_over_f += beta_j[last] / state.f[last];

        const double lambda = sum_b / (beta + sum_b_over_f);
        const double level = 1.0 / lambda;
        const bool last_positive = level - 1.0 / state.f[last] > 0.0;
        const bool next_off = m == active.size() || level - 1.0 / state.f[active[m]] <= boundary_tol;

        // f is non-increasing along the sorted groups, so the first consistent m is the answer.
        if (last_positive && next_off)
        {
            out.lambda = lambda;
            out.m_active = m;
            for (std::size_t i = 0; i < m; ++i)
                out.p_bar[active[i]] = std::max(0.0, level - 1.0 / state.f[active[i]]);
            return out;
        }
    }

    // Unreachable for valid input: m = |active| always satisfies both conditions when f > 0.
    throw std::logic_error("waterfill: no consistent active set found.");
}

PowerAllocation waterfill(const Scenario &scenario, double rho)
{
    return waterfill(scenario, evaluate_state(scenario, rho));
}

double kkt_residual_p(const Scenario &scenario, double rho, const PowerAllocation &alloc)
{
    const auto st = evaluate_state(scenario, rho);
    double worst = 0.0;
    for (std::size_t j = 0; j < scenario.groups(); ++j)
    {
        if (!(scenario.loading()[j] > 0.0))
            continue;
        const double f = st.f[j];
        if (alloc.p_bar[j] > 0.0)
            worst = std::max(worst, std::abs(f / (1.0 + alloc.p_bar[j] * f) - alloc.lambda));
        else
            worst = std::max(worst, std::max(0.0, f - alloc.lambda));
    }
    return worst;
}

} // namespace rci
