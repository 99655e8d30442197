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

#ifndef AOA_SERIALIZATION_HPP
#define AOA_SERIALIZATION_HPP

#include "aoa/array_model.hpp"
#include "aoa/classical.hpp"
#include "aoa/errors.hpp"

#include <json.hpp>

#include <set>
#include <string>
#include <utility>

namespace aoa
{
    nlohmann::json to_json(const ArrayGeometry &g);
    nlohmann::json to_json(const SceneDistribution &d);
    nlohmann::json to_json(const GridSpec &g);
    nlohmann::json to_json(const ImpairmentParams &p);

    // Reads keys from a JSON object, remembering which were consumed, so that
    // finish() can reject unknown keys. Type errors become config errors.
    class JsonSection
    {
    public:
        JsonSection(const nlohmann::json &j, std::string path);

        bool has(const std::string &key) const { return j_.contains(key) && !j_.at(key).is_null(); }

        template <typename T>
        T get(const std::string &key, T fallback)
        {
            seen_.insert(key);
            if (!has(key))
                return fallback;
            try
            {
                return j_.at(key).get<T>();
            }
            catch (const nlohmann::json::exception &)
            {
                fail(ErrorKind::config, path_ + "." + key + ": wrong type");
            }
        }

        std::pair<double, double> get_range(const std::string &key, std::pair<double, double> fallback);

        // Sub-object; an absent key yields an empty object.
        JsonSection section(const std::string &key);

        const nlohmann::json &raw(const std::string &key)
        {
            seen_.insert(key);
            return j_.at(key);
        }

        void finish() const;

    private:
        const nlohmann::json &j_;
        std::string path_;
        std::set<std::string> seen_;
    };

    ArrayGeometry geometry_from_json(JsonSection s);
    SceneDistribution distribution_from_json(JsonSection s);
    GridSpec grid_from_json(JsonSection s, const GridSpec &defaults);
    ImpairmentParams impairment_from_json(JsonSection s);

    // Fixed-notation number formatting used by all CSV writers (round-trippable).
    std::string format_number(double v);
}

#endif
