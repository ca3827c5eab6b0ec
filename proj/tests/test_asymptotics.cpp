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

#include "oracles.hpp"

#include "rci/asymptotics.hpp"
#include "rci/finite_mc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace rci;

namespace
{

double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// f_j as a function of rho alone, with g recomputed.
double f_of_rho(double gamma, double beta, double rho)
{
    return eff_gain(gamma, beta, rho, solve_g(beta, rho));
}

} // namespace

TEST_SUITE("asymptotics")
{

TEST_CASE("scenario validation")
{
    CHECK_THROWS_AS(Scenario({}, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({1.0, 0.5}, {0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({1.0}, {0.5}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({0.0}, {0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({1.0}, {-0.1}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({0.5, 1.0}, {0.5, 0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Scenario({1.0, 0.5}, {0.0, 0.0}, 1.0), std::invalid_argument);

    const Scenario s({1.0, 0.25}, {0.3, 0.2}, 10.0);
    CHECK(s.gamma()[0] == 10.0 * 1.0);
    CHECK(s.gamma()[1] == 10.0 * 0.25);
    CHECK(s.beta_total() == doctest::Approx(0.5));
}

TEST_CASE("sorting keeps ties in input order")
{
    const double a[] = {0.25, 1.0, 0.25, 0.5};
    const double b[] = {0.1, 0.2, 0.3, 0.4};
    const auto s = Scenario::sorted(a, b, 2.0);
    CHECK(s.order() == std::vector<std::size_t>{1, 3, 0, 2});
    CHECK(s.loading() == std::vector<double>{0.2, 0.4, 0.1, 0.3});
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(s.gamma()[j] == 2.0 * s.path_gain_sq()[j]);
}

TEST_CASE("g closed form")
{
    CHECK(solve_g(1.0, 2.0) == doctest::Approx((std::sqrt(3.0) - 1.0) / 2.0).epsilon(1e-12));
    CHECK(solve_g(2.0, 1.0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
    CHECK(solve_g(1.0, 1e6) == doctest::Approx(1e-6).epsilon(0.01));
    CHECK_THROWS_AS(solve_g(1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(solve_g(1.0, -1.0), std::domain_error);
    CHECK_THROWS_AS(solve_g(0.0, 1.0), std::domain_error);
}

TEST_CASE("g fixed-point residual and damped iteration agree")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ub(0.05, 4.0), ulr(std::log(1e-4), std::log(1e3));
    for (int i = 0; i < 500; ++i)
    {
        const double beta = ub(gen), rho = std::exp(ulr(gen));
        const double g = solve_g(beta, rho);
        CHECK(g > 0.0);
        CHECK(std::abs(g * (rho + beta / (1.0 + g)) - 1.0) <= 1e-10);
        CHECK(rel_err(g, oracle::fixed_point_g(beta, rho)) <= 1e-9);
    }
}

TEST_CASE("dg/drho examples")
{
    const double g = solve_g(1.0, 2.0);
    CHECK(dg_drho(1.0, 2.0, g) == doctest::Approx(-0.144338).epsilon(1e-5));
    const double fd = oracle::central_diff([](double r) { return solve_g(1.0, r); }, 2.0);
    CHECK(std::abs(dg_drho(1.0, 2.0, g) - fd) <= 1e-6);

    const double g2 = solve_g(2.0, 1.0);
    CHECK(std::abs(dg_drho(2.0, 1.0, g2) - oracle::central_diff([](double r) { return solve_g(2.0, r); }, 1.0)) <=
          1e-6);
}

TEST_CASE("effective gain examples")
{
    const double g = solve_g(1.0, 2.0);
    CHECK(eff_gain(10.0, 1.0, 2.0, g) == doctest::Approx(1.459672256).epsilon(1e-9));

    // Large-gamma limit.
    const double lim = g * (1.0 + 2.0 * (1.0 + g) * (1.0 + g));
    CHECK(rel_err(eff_gain(1e12, 1.0, 2.0, g), lim) <= 1e-9);

    // Increasing in gamma.
    double prev = 0.0;
    for (double gm = 0.1; gm < 100.0; gm *= 1.3)
    {
        const double f = eff_gain(gm, 1.0, 2.0, g);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("effective gain against a finite system at N = 256")
{
    // One group, p = 1, gamma = 10, beta = 1, rho = 2.
    const Scenario s({1.0}, {1.0}, 10.0);
    const double limit = f_of_rho(10.0, 1.0, 2.0);
    double mean = 0.0;
    const int trials = 4;
    for (int t = 0; t < trials; ++t)
    {
        const auto ch = sample_channel(256, s, 5, static_cast<std::uint64_t>(t));
        const double p[] = {1.0};
        const auto rep = finite_sinr(ch, p, 2.0, s);
        for (double x : rep.sinr)
            mean += x;
    }
    mean /= 256.0 * trials;
    CHECK(rel_err(mean, limit) <= 0.05);
}

TEST_CASE("df/drho examples and sign")
{
    const double g = solve_g(1.0, 2.0);
    CHECK(df_drho(10.0, 1.0, 0.1, solve_g(1.0, 0.1)) == 0.0);
    const double fd = oracle::central_diff([](double r) { return f_of_rho(10.0, 1.0, r); }, 2.0);
    CHECK(std::abs(df_drho(10.0, 1.0, 2.0, g) - fd) <= 1e-6);

    // Unimodal in rho with the peak at beta / gamma.
    for (double gamma : {0.5, 3.0, 10.0, 100.0})
        for (double beta : {0.2, 1.0, 2.5})
        {
            const double peak = beta / gamma;
            CHECK(df_drho(gamma, beta, 0.5 * peak, solve_g(beta, 0.5 * peak)) > 0.0);
            CHECK(df_drho(gamma, beta, 0.99 * peak, solve_g(beta, 0.99 * peak)) > 0.0);
            CHECK(df_drho(gamma, beta, 1.01 * peak, solve_g(beta, 1.01 * peak)) < 0.0);
            CHECK(df_drho(gamma, beta, 3.0 * peak, solve_g(beta, 3.0 * peak)) < 0.0);
            int changes = 0;
            double last = df_drho(gamma, beta, peak * 1e-3, solve_g(beta, peak * 1e-3));
            for (double r = peak * 1e-3; r < peak * 1e3; r *= 1.05)
            {
                const double d = df_drho(gamma, beta, r, solve_g(beta, r));
                if ((d > 0.0) != (last > 0.0))
                    ++changes;
                last = d;
            }
            CHECK(changes == 1);
        }
}

TEST_CASE("df/dbeta examples, alternate form and sign")
{
    const double g = solve_g(1.0, 2.0);
    const double fd = oracle::central_diff([](double b) { return f_of_rho(10.0, b, 2.0); }, 1.0);
    CHECK(std::abs(df_dbeta(10.0, 1.0, 2.0, g) - fd) <= 1e-6);

    // Second form: -(f/beta)(1 + g/D) + df/drho / (1 + g).
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 10; ++k)
        {
            const double beta = 0.1 + 0.3 * i, rho = 0.01 * std::pow(2.0, k);
            for (double gamma : {0.7, 10.0})
            {
                const double gg = solve_g(beta, rho);
                const double f = eff_gain(gamma, beta, rho, gg);
                const double D = 1.0 + rho / beta * (1.0 + gg) * (1.0 + gg);
                const double alt = -f / beta * (1.0 + gg / D) + df_drho(gamma, beta, rho, gg) / (1.0 + gg);
                CHECK(std::abs(df_dbeta(gamma, beta, rho, gg) - alt) <= 1e-12 * std::max(1.0, std::abs(alt)));
            }
        }

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ug(0.1, 100.0), ub(0.05, 4.0), us(1.0, 20.0);
    for (int i = 0; i < 300; ++i)
    {
        const double gamma = ug(gen), beta = ub(gen), rho = beta / gamma * us(gen);
        CHECK(df_dbeta(gamma, beta, rho, solve_g(beta, rho)) < 0.0);
    }
}

TEST_CASE("derivatives match central differences on random points")
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> ug(0.1, 100.0), ub(0.05, 4.0), ulr(std::log(1e-3), std::log(10.0));
    int checked = 0;
    for (int i = 0; i < 200; ++i)
    {
        const double gamma = ug(gen), beta = ub(gen), rho = std::exp(ulr(gen));
        const double g = solve_g(beta, rho);
        const double h = 1e-6 * std::max(rho, 1e-3);

        const double dg = dg_drho(beta, rho, g);
        const double dg_fd = oracle::central_diff([&](double r) { return solve_g(beta, r); }, rho, h);
        CHECK(rel_err(dg, dg_fd) <= 1e-5);

        const double dfr = df_drho(gamma, beta, rho, g);
        const double dfr_fd = oracle::central_diff([&](double r) { return f_of_rho(gamma, beta, r); }, rho, h);
        // Near the peak the derivative itself vanishes; compare against the scale of f.
        CHECK(std::abs(dfr - dfr_fd) <= 1e-5 * std::max(std::abs(dfr_fd), 1e-3 * eff_gain(gamma, beta, rho, g) / rho));

        const double hb = 1e-6 * beta;
        const double dfb = df_dbeta(gamma, beta, rho, g);
        const double dfb_fd = oracle::central_diff([&](double b) { return f_of_rho(gamma, b, rho); }, beta, hb);
        CHECK(rel_err(dfb, dfb_fd) <= 1e-5);
        ++checked;
    }
    CHECK(checked >= 100);
}

TEST_CASE("state ordering and sum rate")
{
    const Scenario s({1.0, 0.5, 0.25}, {0.3, 0.3, 0.4}, 10.0);
    const auto st = evaluate_state(s, 0.2);
    for (double f : st.f)
        CHECK(f > 0.0);
    CHECK(st.f[0] >= st.f[1]);
    CHECK(st.f[1] >= st.f[2]);

    const std::vector<double> zero(3, 0.0);
    CHECK(limiting_sum_rate(s, zero, 0.2) == 0.0);
    const std::vector<double> neg{1.0, -0.1, 1.0};
    CHECK_THROWS_AS(limiting_sum_rate(s, neg, 0.2), std::domain_error);

    // Doubling p and halving f leaves each term unchanged.
    const std::vector<double> p{1.2, 1.0, 0.85};
    auto st2 = st;
    std::vector<double> p2 = p;
    for (std::size_t j = 0; j < 3; ++j)
    {
        st2.f[j] *= 0.5;
        p2[j] *= 2.0;
    }
    CHECK(limiting_sum_rate(s, p2, st2) == doctest::Approx(limiting_sum_rate(s, p, st)).epsilon(1e-14));
}

TEST_CASE("sum rate is concave in the powers")
{
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> up(0.0, 3.0), ur(0.01, 1.0);
    for (int i = 0; i < 50; ++i)
    {
        const auto s = oracle::random_scenario(gen, 3);
        const double rho = ur(gen);
        const auto st = evaluate_state(s, rho);
        std::vector<double> p1(3), p2(3), mid(3);
        for (std::size_t j = 0; j < 3; ++j)
        {
            p1[j] = up(gen);
            p2[j] = up(gen);
            mid[j] = 0.5 * (p1[j] + p2[j]);
        }
        CHECK(limiting_sum_rate(s, mid, st) >=
              0.5 * limiting_sum_rate(s, p1, st) + 0.5 * limiting_sum_rate(s, p2, st) - 1e-9);

        // Finite-difference Hessian: diagonal, non-positive.
        const double h = 1e-4;
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b)
            {
                auto at = [&](double da, double db) {
                    auto q = mid;
                    q[a] += da;
                    q[b] += db;
                    return limiting_sum_rate(s, q, st);
                };
                const double hab = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
                if (a == b)
                    CHECK(hab <= 1e-6);
                else
                    CHECK(std::abs(hab) <= 1e-5);
            }
    }
}

} // TEST_SUITE
