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

#include "aoa/model_order.hpp"
#include "aoa/errors.hpp"

#include <algorithm>
#include <cmath>

namespace aoa
{
    const char *to_string(OrderCriterion c)
    {
        return c == OrderCriterion::mdl ? "mdl" : "aic";
    }

    OrderCriterionTrace order_criterion(OrderCriterion criterion, const RVector &eigenvalues, int snapshots)
    {
        const auto Q = static_cast<int>(eigenvalues.size());
        if (Q < 1)
            fail(ErrorKind::structural, "order_criterion: no eigenvalues");
        if (snapshots < 1)
            fail(ErrorKind::domain, "order_criterion: snapshot count must be positive");
        if (eigenvalues.maxCoeff() < eigenvalue_floor)
            fail(ErrorKind::degeneracy, "order_criterion: all eigenvalues are below the floor (zero covariance)");

        std::vector<double> lambda(static_cast<std::size_t>(Q));
        for (int i = 0; i < Q; ++i)
            lambda[static_cast<std::size_t>(i)] = std::max(eigenvalues(i), eigenvalue_floor);
        std::sort(lambda.begin(), lambda.end(), std::greater<>());

        const double L = snapshots;
        OrderCriterionTrace out;
        out.criterion = criterion;
        out.values.resize(static_cast<std::size_t>(Q));
        for (int k = 0; k < Q; ++k)
        {
            const int tail = Q - k;
            double log_sum = 0.0;
            double sum = 0.0;
            for (int i = k; i < Q; ++i)
            {
                log_sum += std::log(lambda[static_cast<std::size_t>(i)]);
                sum += lambda[static_cast<std::size_t>(i)];
            }
            // log(geometric mean / arithmetic mean) <= 0
            const double log_ratio = std::min(0.0, log_sum / tail - std::log(sum / tail));
            const double free_parameters = static_cast<double>(k) * (2.0 * Q - k);
            double value = 0.0;
            if (criterion == OrderCriterion::mdl)
                value = -L * tail * log_ratio + 0.5 * free_parameters * std::log(L);
            else
                value = -2.0 * L * tail * log_ratio + 2.0 * free_parameters;
            out.values[static_cast<std::size_t>(k)] = value;
        }
        out.selected = static_cast<int>(std::min_element(out.values.begin(), out.values.end()) - out.values.begin());
        out.clamped = std::clamp(out.selected, 1, 4);
        return out;
    }

    OrderCriterionTrace mdl_order(const SmoothedCovariance &R)
    {
        return order_criterion(OrderCriterion::mdl, hermitian_eig(R.matrix).eigenvalues, R.subarray_count);
    }

    OrderCriterionTrace aic_order(const SmoothedCovariance &R)
    {
        return order_criterion(OrderCriterion::aic, hermitian_eig(R.matrix).eigenvalues, R.subarray_count);
    }
}
