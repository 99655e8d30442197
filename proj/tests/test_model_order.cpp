// SPDX-License-Identifier: Apache-2.0
//
// aoa-lab: single-snapshot angle-of-arrival estimation laboratory
// Copyright (C) 2026 The aoa-lab Authors
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

#include "aoa/errors.hpp"
#include "aoa/model_order.hpp"

#include <doctest.h>

#include <cmath>

using namespace aoa;

namespace
{
    // Reference evaluation written out term by term.
    double criterion_oracle(bool mdl, const std::vector<double> &lam, int k, int L)
    {
        const int Q = static_cast<int>(lam.size());
        double logsum = 0.0, sum = 0.0;
        for (int i = k; i < Q; ++i)
        {
            const double l = std::max(lam[static_cast<std::size_t>(i)], 1e-15);
            logsum += std::log(l);
            sum += l;
        }
        const int n = Q - k;
        const double log_ratio = logsum / n - std::log(sum / n);
        const double penalty = k * (2.0 * Q - k);
        return mdl ? -L * n * log_ratio + 0.5 * penalty * std::log(L) : -2.0 * L * n * log_ratio + 2.0 * penalty;
    }

    RVector vec(const std::vector<double> &v)
    {
        return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
}

TEST_CASE("criteria values match the term-by-term oracle")
{
    const std::vector<double> lam{9.0, 4.0, 1.3, 1.1, 1.0, 0.9, 0.8, 0.7};
    for (auto c : {OrderCriterion::mdl, OrderCriterion::aic})
    {
        const auto tr = order_criterion(c, vec(lam), 9);
        REQUIRE(tr.values.size() == 8);
        for (int k = 0; k < 8; ++k)
            CHECK(tr.values[static_cast<std::size_t>(k)] ==
                  doctest::Approx(criterion_oracle(c == OrderCriterion::mdl, lam, k, 9)).epsilon(1e-12));
        // last candidate uses a single eigenvalue: log-ratio zero
        const double pen = 7.0 * 9.0;
        CHECK(tr.values[7] == doctest::Approx(c == OrderCriterion::mdl ? 0.5 * pen * std::log(9.0) : 2.0 * pen));
    }
}

TEST_CASE("white noise selects 0 and clamps to 1; rank-1 selects 1")
{
    const RVector white = RVector::Constant(8, 2.5);
    for (auto c : {OrderCriterion::mdl, OrderCriterion::aic})
    {
        const auto w = order_criterion(c, white, 9);
        CHECK(w.selected == 0);
        CHECK(w.clamped == 1);

        RVector r1 = RVector::Constant(8, 1e-13);
        r1(0) = 8.0;
        CHECK(order_criterion(c, r1, 9).selected == 1);
    }
}

TEST_CASE("selected order is invariant to covariance scaling; clamping range")
{
    const std::vector<double> lam{20.0, 11.0, 6.0, 5.0, 0.12, 0.1, 0.09, 0.08};
    for (auto c : {OrderCriterion::mdl, OrderCriterion::aic})
    {
        const auto base = order_criterion(c, vec(lam), 9);
        CHECK(base.selected == 4);
        for (double s : {1e-6, 3.0, 1e4})
            CHECK(order_criterion(c, s * vec(lam), 9).selected == base.selected);
    }
    // six strong eigenvalues select 6, clamped to 4
    const std::vector<double> many{50, 40, 30, 20, 15, 10, 0.01, 0.011};
    const auto m = order_criterion(OrderCriterion::mdl, vec(many), 9);
    CHECK(m.selected == 6);
    CHECK(m.clamped == 4);
}

TEST_CASE("MDL penalty is non-negative and increasing")
{
    const RVector white = RVector::Constant(8, 1.0);
    const auto tr = order_criterion(OrderCriterion::mdl, white, 9);
    CHECK(tr.values[0] == doctest::Approx(0.0).scale(1.0));
    for (std::size_t k = 1; k < tr.values.size(); ++k)
        CHECK(tr.values[k] > tr.values[k - 1]);
}

TEST_CASE("degenerate input")
{
    try
    {
        order_criterion(OrderCriterion::aic, RVector::Zero(8), 9);
        FAIL("expected a degeneracy error");
    }
    catch (const Error &e)
    {
        CHECK(e.kind() == ErrorKind::degeneracy);
    }
}

TEST_CASE("smoothed-covariance wrappers")
{
    const auto g = ArrayGeometry::uniform_linear();
    Rng rng(0);
    const Snapshot one = synthesize_snapshot(g, {{12.0}, {1.0}}, std::nullopt, rng);
    const auto R = spatial_smooth(one.y, 8);
    CHECK(mdl_order(R).selected == 1);
    CHECK(aic_order(R).selected == 1);
    CHECK(mdl_order(R).criterion == OrderCriterion::mdl);

    // two separated sources at 20 dB: majority correct
    int mdl_ok = 0, aic_ok = 0;
    Rng r(10);
    const int trials = 1000;
    for (int t = 0; t < trials; ++t)
    {
        const double a = r.uniform(-25, -5);
        const Snapshot s = synthesize_snapshot(g, {{a, a + r.uniform(10, 30)}, {std::polar(r.uniform(0.5, 1.5), r.uniform(0, 2 * pi)), std::polar(r.uniform(0.5, 1.5), r.uniform(0, 2 * pi))}}, 20.0, r);
        const auto Rs = spatial_smooth(s.y, 8);
        mdl_ok += mdl_order(Rs).clamped == 2;
        aic_ok += aic_order(Rs).clamped == 2;
    }
    MESSAGE("two sources at 20 dB: MDL " << mdl_ok << "/" << trials << ", AIC " << aic_ok << "/" << trials);
    CHECK(mdl_ok > trials / 2);
}
