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

#ifndef AOA_PARALLEL_HPP
#define AOA_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace aoa
{
    inline unsigned default_workers()
    {
        return std::max(1u, std::thread::hardware_concurrency());
    }

    // Runs fn(i) for i in [0, count) on up to `workers` threads using static
    // contiguous partitioning. Callers write results by index, so the outcome is
    // independent of the worker count. The first exception is rethrown.
    template <typename Fn>
    void parallel_for(std::size_t count, unsigned workers, Fn &&fn)
    {
        workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
        if (workers == 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                fn(i);
            return;
        }

        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        const std::size_t chunk = (count + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w)
        {
            const std::size_t begin = std::min(count, w * chunk);
            const std::size_t end = std::min(count, begin + chunk);
            threads.emplace_back([&, w, begin, end]
                                 {
                try
                {
                    for (std::size_t i = begin; i < end; ++i)
                        fn(i);
                }
                catch (...)
                {
                    errors[w] = std::current_exception();
                } });
        }
        for (auto &t : threads)
            t.join();
        for (auto &e : errors)
            if (e)
                std::rethrow_exception(e);
    }
}

#endif
