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

#include "aoa/serialization.hpp"

#include <cmath>
#include <cstdio>

namespace aoa
{
    namespace
    {
        const nlohmann::json &empty_object()
        {
            static const nlohmann::json e = nlohmann::json::object();
            return e;
        }
    }

    nlohmann::json to_json(const ArrayGeometry &g)
    {
        return {{"positions", g.positions}, {"wavelength", g.wavelength}};
    }

    nlohmann::json to_json(const SceneDistribution &d)
    {
        return {
            {"fov_deg", {d.fov_deg.first, d.fov_deg.second}},
            {"min_sources", d.min_sources},
            {"max_sources", d.max_sources},
            {"amplitude_range", {d.amplitude_range.first, d.amplitude_range.second}},
            {"phase_range", {d.phase_range.first, d.phase_range.second}},
            {"snr_range_db", {d.snr_range_db.first, d.snr_range_db.second}},
            {"min_separation_deg", d.min_separation_deg},
            {"noise_enabled", d.noise_enabled},
        };
    }

    nlohmann::json to_json(const GridSpec &g)
    {
        return {{"fov_deg", {g.fov_deg.first, g.fov_deg.second}}, {"step_deg", g.step_deg}};
    }

    nlohmann::json to_json(const ImpairmentParams &p)
    {
        nlohmann::json j = {{"phase_sigma_deg", p.phase_sigma_deg}};
        j["crosstalk_gamma_db"] = p.crosstalk_gamma_db ? nlohmann::json(*p.crosstalk_gamma_db) : nlohmann::json(nullptr);
        return j;
    }

    JsonSection::JsonSection(const nlohmann::json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail(ErrorKind::config, path_ + ": expected a JSON object");
    }

    std::pair<double, double> JsonSection::get_range(const std::string &key, std::pair<double, double> fallback)
    {
        seen_.insert(key);
        if (!has(key))
            return fallback;
        const auto &v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            fail(ErrorKind::config, path_ + "." + key + ": expected [min, max]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    JsonSection JsonSection::section(const std::string &key)
    {
        seen_.insert(key);
        if (!has(key))
            return JsonSection(empty_object(), path_ + "." + key);
        return JsonSection(j_.at(key), path_ + "." + key);
    }

    void JsonSection::finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail(ErrorKind::config, path_ + ": unknown key '" + it.key() + "'");
    }

    ArrayGeometry geometry_from_json(JsonSection s)
    {
        const int n = s.get<int>("element_count", 16);
        const double spacing = s.get<double>("spacing", 0.5);
        const double wavelength = s.get<double>("wavelength", 1.0);
        ArrayGeometry g;
        if (s.has("positions"))
        {
            g.positions = s.get<std::vector<double>>("positions", {});
            g.wavelength = wavelength;
        }
        else
        {
            if (n < 1)
                fail(ErrorKind::config, "geometry.element_count must be positive");
            if (!(spacing > 0.0))
                fail(ErrorKind::config, "geometry.spacing must be positive");
            g = ArrayGeometry::uniform_linear(n, spacing, wavelength);
        }
        s.finish();
        g.validate();
        return g;
    }

    SceneDistribution distribution_from_json(JsonSection s)
    {
        SceneDistribution d;
        d.fov_deg = s.get_range("fov_deg", d.fov_deg);
        d.min_sources = s.get<int>("min_sources", d.min_sources);
        d.max_sources = s.get<int>("max_sources", d.max_sources);
        d.amplitude_range = s.get_range("amplitude_range", d.amplitude_range);
        d.phase_range = s.get_range("phase_range", d.phase_range);
        d.snr_range_db = s.get_range("snr_range_db", d.snr_range_db);
        d.min_separation_deg = s.get<double>("min_separation_deg", d.min_separation_deg);
        d.noise_enabled = s.get<bool>("noise_enabled", d.noise_enabled);
        s.finish();
        d.validate();
        return d;
    }

    GridSpec grid_from_json(JsonSection s, const GridSpec &defaults)
    {
        GridSpec g;
        g.fov_deg = s.get_range("fov_deg", defaults.fov_deg);
        g.step_deg = s.get<double>("step_deg", defaults.step_deg);
        s.finish();
        g.validate();
        return g;
    }

    ImpairmentParams impairment_from_json(JsonSection s)
    {
        ImpairmentParams p;
        p.phase_sigma_deg = s.get<double>("phase_sigma_deg", 0.0);
        if (s.has("crosstalk_gamma_db"))
            p.crosstalk_gamma_db = s.get<double>("crosstalk_gamma_db", 0.0);
        else
            s.get<double>("crosstalk_gamma_db", 0.0);
        s.finish();
        p.validate();
        return p;
    }

    std::string format_number(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
}
