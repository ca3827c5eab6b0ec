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

#ifndef RCI_WATERFILL_HPP
#define RCI_WATERFILL_HPP

#include "rci/asymptotics.hpp"

#include <cstddef>
#include <vector>

namespace rci
{

// Per-group normalized powers with sum_j beta_j p_j = beta.
// p_bar[j] = max(0, 1/lambda - 1/f_j); groups with zero loading get 0.
struct PowerAllocation
{
    std::vector<double> p_bar;
    double lambda = 0.0;       // inverse water level
    std::size_t m_active = 0;  // groups with p_bar > 0
};

// Optimal allocation for a fixed rho.
// The active set is found by scanning m = 1, 2, ... over loaded groups with the closed-form
// multiplier lambda = sum_{j<=m} beta_j / (beta + sum_{j<=m} beta_j / f_j).
PowerAllocation waterfill(const Scenario &scenario, const AsymptoticState &state);
PowerAllocation waterfill(const Scenario &scenario, double rho);

// Worst stationarity violation: |f_j/(1+p_j f_j) - lambda| over active groups,
// max(0, f_j - lambda) over inactive ones.
double kkt_residual_p(const Scenario &scenario, double rho, const PowerAllocation &alloc);

} // namespace rci

#endif
