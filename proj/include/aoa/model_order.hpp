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

#ifndef AOA_MODEL_ORDER_HPP
#define AOA_MODEL_ORDER_HPP

#include "aoa/classical.hpp"

#include <string>
#include <vector>

namespace aoa
{
    enum class OrderCriterion
    {
        mdl,
        aic
    };

    struct OrderCriterionTrace
    {
        OrderCriterion criterion = OrderCriterion::mdl;
        std::vector<double> values; // indexed by candidate order k = 0..Q-1
        int selected = 0;           // argmin, ties toward smaller k
        int clamped = 1;            // selected limited to [1, 4]
    };

    const char *to_string(OrderCriterion c);

    inline constexpr double eigenvalue_floor = 1e-15;

    // Information criterion evaluated on eigenvalues sorted descending, with
    // `snapshots` effective observations. Eigenvalues are floored before logs.
    OrderCriterionTrace order_criterion(OrderCriterion criterion, const RVector &eigenvalues, int snapshots);

    // Both use the subarray count of the smoothed covariance as the snapshot count.
    OrderCriterionTrace mdl_order(const SmoothedCovariance &R);
    OrderCriterionTrace aic_order(const SmoothedCovariance &R);
}

#endif
