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

#include "rci/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rci
{

void LoadingBounds::validate(std::size_t groups) const
{
    if (beta_max.size() != groups)
        throw std::invalid_argument("LoadingBounds: beta_max length does not match the number of groups.");
    bool any = false;
    for (double b : beta_max)
    {
        if (!(b >= 0.0) || !std::isfinite(b))
            throw std::invalid_argument("LoadingBounds: beta_max entries must be non-negative.");
        any = any || b > 0.0;
    }
    if (!any)
        throw std::invalid_argument("LoadingBounds: at least one beta_max must be positive.");
}

std::vector<std::size_t> ModeSolution::served() const
{
    std::vector<std::size_t> out(mode_m);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

double mu_at_optimum(double beta_star, double rho_star, double lambda, double g)
{
    return -lambda * (1.0 + g / (1.0 + rho_star / beta_star * (1.0 + g) * (1.0 + g)));
}

double eta_of_group(const ModeSolution &sol, std::size_t k)
{
    const double f = sol.p1.state.f.at(k);
    // An unloaded group is evaluated at the power water-filling would give it.
    double p = sol.p1.alloc.p_bar.at(k);
    if (!(sol.loadings.at(k) > 0.0))
        p = std::max(0.0, 1.0 / sol.lambda - 1.0 / f);
    return std::log1p(p * f) - sol.lambda * (p - 1.0) + sol.mu;
}

double eta_last(const ModeSolution &sol)
{
    if (sol.mode_m == 0)
        throw std::invalid_argument("eta_last: empty mode.");
    return eta_of_group(sol, sol.mode_m - 1);
}

std::vector<double> eta_values(const ModeSolution &sol)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < sol.mode_m; ++k)
        out.push_back(eta_of_group(sol, k));
    return out;
}

ModeSolution solve_with_loadings(const Scenario &base, std::vector<double> loadings, std::size_t mode_m,
                                 const MultimodeOptions &opts)
{
    if (mode_m == 0 || mode_m > base.groups())
        throw std::invalid_argument("solve_with_loadings: mode out of range.");
    const Scenario s = base.with_loading(loadings);

    ModeSolution out;
    out.mode_m = mode_m;
    out.loadings = std::move(loadings);
    out.beta_star = s.beta_total();
    out.p1 = solve_p1(s, opts.p1);
    out.lambda = out.p1.alloc.lambda;
    out.mu = mu_at_optimum(out.beta_star, out.p1.rho_star, out.lambda, out.p1.state.g);
    out.eta_m = eta_of_group(out, mode_m - 1);
    return out;
}

ModeSolution solve_mode_binary(const Scenario &base, const LoadingBounds &bounds, std::size_t m,
                               const MultimodeOptions &opts)
{
    bounds.validate(base.groups());
    if (m < 1 || m > base.groups())
        throw std::invalid_argument("solve_mode_binary: mode must lie in 1..L.");
    for (std::size_t j = 1; j < bounds.beta_max.size(); ++j)
        if (bounds.beta_max[j] > bounds.beta_max[j - 1])
            throw std::domain_error("solve_mode_binary: prefix modes are only optimal for non-increasing beta_max; "
                                    "use an exhaustive subset search instead.");

    std::vector<double> loadings(base.groups(), 0.0);
    for (std::size_t j = 0; j < m; ++j)
        loadings[j] = bounds.beta_max[j];
    return solve_with_loadings(base, std::move(loadings), m, opts);
}

ModeSolution solve_p2(const Scenario &base, const LoadingBounds &bounds, const MultimodeOptions &opts)
{
    ModeSolution best = solve_mode_binary(base, bounds, 1, opts);
    for (std::size_t m = 2; m <= base.groups(); ++m)
    {
        auto sol = solve_mode_binary(base, bounds, m, opts);
        if (sol.rate() > best.rate() + opts.rate_tie_tol)
            best = std::move(sol);
    }
    return best;
}

BetaMResult solve_beta_M(const Scenario &base, const LoadingBounds &bounds, std::size_t M,
                         const MultimodeOptions &opts)
{
    bounds.validate(base.groups());
    if (M < 1 || M > base.groups())
        throw std::invalid_argument("solve_beta_M: M must lie in 1..L.");
    const std::size_t last = M - 1;
    const double cap = bounds.beta_max[last];
    if (!(cap > 0.0))
        throw std::invalid_argument("solve_beta_M: group M has no loading to adjust.");

    std::vector<double> loadings(base.groups(), 0.0);
    double prefix = 0.0;
    for (std::size_t i = 0; i < last; ++i)
    {
        loadings[i] = bounds.beta_max[i];
        prefix += loadings[i];
    }

    auto solve_at = [&](double x) {
        auto l = loadings;
        l[last] = x;
        return solve_with_loadings(base, std::move(l), M, opts);
    };

    BetaMResult out;
    ModeSolution at_cap = solve_at(cap);
    if (at_cap.eta_m >= -opts.eta_tol)
    {
        out.beta_m = cap;
        out.solution = std::move(at_cap);
        return out;
    }

    // With nothing else loaded the total would vanish at zero, so scan from just above it.
    const double x_min = prefix > 0.0 ? 0.0 : cap * 1e-9;
    const std::size_t n = std::max<std::size_t>(opts.beta_scan_points, 2);
    std::vector<double> xs(n), etas(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        xs[i] = i + 1 == n ? cap : x_min + (cap - x_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        etas[i] = i + 1 == n ? at_cap.eta_m : solve_at(xs[i]).eta_m;
    }

    // Largest bracket wins.
    std::size_t bracket = n;
    for (std::size_t i = n - 1; i-- > 0;)
    {
        if ((etas[i] > 0.0 && etas[i + 1] < 0.0) || (etas[i] < 0.0 && etas[i + 1] > 0.0) || etas[i] == 0.0)
        {
            bracket = i;
            break;
        }
    }

    if (bracket == n)
    {
        out.beta_m = x_min;
        out.solution = solve_at(x_min);
        out.diagnostic = "eta_M does not change sign on [0, beta_max]; group dropped";
        return out;
    }

    double a = xs[bracket], b = xs[bracket + 1];
    double ea = etas[bracket];
    ModeSolution sol = solve_at(a);
    if (ea != 0.0)
    {
        for (int it = 0; it < 200; ++it)
        {
            const double mid = 0.5 * (a + b);
            sol = solve_at(mid);
            if (std::abs(sol.eta_m) <= opts.eta_root_tol || b - a <= 1e-15 * std::max(1.0, cap))
            {
                a = b = mid;
                break;
            }
            if ((sol.eta_m < 0.0) == (ea < 0.0))
            {
                a = mid;
                ea = sol.eta_m;
            }
            else
                b = mid;
        }
    }
    out.beta_m = sol.loadings[last];
    out.solution = std::move(sol);
    out.interior_root = true;
    if (std::abs(out.solution.eta_m) > opts.eta_root_tol)
        out.diagnostic = "bisection stopped before |eta_M| reached tolerance";
    return out;
}

P3Result solve_p3(const Scenario &base, const LoadingBounds &bounds, bool early_break, const MultimodeOptions &opts)
{
    bounds.validate(base.groups());
    const std::size_t L = base.groups();

    P3Result out;
    std::set<std::size_t> seen;
    for (std::size_t j = 1; j <= L; ++j)
    {
        P3Iteration it;
        it.j = j;

        std::vector<double> loadings(L, 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < j; ++i)
        {
            loadings[i] = bounds.beta_max[i];
            total += loadings[i];
        }
        if (!(total > 0.0))
        {
            it.skipped = true;
            out.trace.push_back(std::move(it));
            continue;
        }

        const P1Solution full = solve_p1(base.with_loading(loadings), opts.p1);
        std::size_t M = 0;
        for (std::size_t i = 0; i < j; ++i)
            if (full.alloc.p_bar[i] > 0.0)
                M = i + 1;
        it.M = M;

        if (seen.contains(M))
        {
            it.skipped = true;
            it.loadings = loadings;
            it.beta_star = total;
            it.rate = full.rate;
            out.trace.push_back(std::move(it));
            continue;
        }
        seen.insert(M);

        for (std::size_t i = M; i < j; ++i)
            loadings[i] = 0.0;
        ModeSolution sol = solve_with_loadings(base, loadings, M, opts);
        it.eta = eta_values(sol);

        const bool negative = sol.eta_m < -opts.eta_tol;
        if (negative)
        {
            auto r = solve_beta_M(base, bounds, M, opts);
            sol = std::move(r.solution);
            it.solved_beta_m = true;
        }
        it.beta_m = sol.loadings[M - 1];
        it.loadings = sol.loadings;
        it.beta_star = sol.beta_star;
        it.rate = sol.rate();
        out.trace.push_back(std::move(it));
        out.candidates.push_back(std::move(sol));

        if (early_break && negative)
            break;
    }

    if (out.candidates.empty())
        throw std::invalid_argument("solve_p3: no group can be served.");

    std::vector<const ModeSolution *> by_m;
    for (const auto &c : out.candidates)
        by_m.push_back(&c);
    std::stable_sort(by_m.begin(), by_m.end(), [](auto *a, auto *b) { return a->mode_m < b->mode_m; });
    const ModeSolution *best = by_m.front();
    for (auto *c : by_m)
        if (c->rate() > best->rate() + opts.rate_tie_tol)
            best = c;
    out.best = *best;
    return out;
}

std::vector<double> prefix_loading(const LoadingBounds &bounds, double beta)
{
    std::vector<double> out(bounds.beta_max.size(), 0.0);
    double left = beta;
    for (std::size_t j = 0; j < out.size() && left > 0.0; ++j)
    {
        out[j] = std::min(bounds.beta_max[j], left);
        left -= out[j];
    }
    return out;
}

BruteForceResult brute_force_p3(const Scenario &base, const LoadingBounds &bounds, double grid_step,
                                const P1Options &opts)
{
    bounds.validate(base.groups());
    if (!(grid_step > 0.0))
        throw std::invalid_argument("brute_force_p3: grid_step must be positive.");

    const double total = std::accumulate(bounds.beta_max.begin(), bounds.beta_max.end(), 0.0);
    auto n = static_cast<std::size_t>(std::floor(total / grid_step + 1e-9));

    BruteForceResult out;
    out.betas.reserve(n + 1);
    out.rates.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
    {
        const double beta = std::min(total, static_cast<double>(i) * grid_step);
        double rate = 0.0;
        if (beta > 0.0)
            rate = solve_p1(base.with_loading(prefix_loading(bounds, beta)), opts).rate;
        out.betas.push_back(beta);
        out.rates.push_back(rate);
        if (rate > out.rate)
        {
            out.rate = rate;
            out.beta = beta;
        }
        if (i == n && total - beta > 1e-12)
            ++n;
    }
    return out;
}

} // namespace rci
