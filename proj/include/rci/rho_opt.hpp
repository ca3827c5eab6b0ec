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

#ifndef RCI_RHO_OPT_HPP
#define RCI_RHO_OPT_HPP

#include "rci/asymptotics.hpp"
#include "rci/waterfill.hpp"

#include <cstddef>
#include <string>

namespace rci
{

struct P1Options
{
    std::size_t grid_points = 256;  // sign-change scan resolution over the rho interval
    double rho_tol = 1e-10;         // bisection stops once the bracket is this narrow
};

// Joint optimum over (p_bar, rho) for a fixed scenario.
struct P1Solution
{
    double rho_star = 0.0;
    PowerAllocation alloc;
    AsymptoticState state;  // evaluated at rho_star
    double rate = 0.0;      // natural log
    double residual = 0.0;  // rho stationarity sum at rho_star
    double rho_lo = 0.0;    // beta / gamma of the strongest loaded group
    double rho_hi = 0.0;    // beta / gamma of the weakest loaded group
    std::size_t roots_found = 0;
    std::string diagnostic;  // non-empty when no sign change was seen
};

// sum_j beta_j p_j f_j^2 / (1 + p_j f_j) * (rho/beta - 1/gamma_j).
// Zero at a stationary rho; negative means the rate is still increasing in rho.
double rho_stationarity(const Scenario &scenario, double rho, const PowerAllocation &alloc);

// Roots of the stationarity sum (water-filling substituted) on [beta/gamma_1, beta/gamma_L],
// located by a uniform scan plus bisection. All roots and both endpoints are rate-compared.
P1Solution solve_p1(const Scenario &scenario, const P1Options &opts = {});

} // namespace rci

#endif
