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

#include "aoa/config.hpp"
#include "aoa/binary_io.hpp"
#include "aoa/checkpoint.hpp"
#include "aoa/serialization.hpp"

#include <filesystem>
#include <functional>

namespace aoa
{
    namespace
    {
        NetworkSpec network_from_json(JsonSection s, const ArrayGeometry &geom, const SceneDistribution &dist)
        {
            NetworkSpec n;
            n.input_dim = s.get<int>("input_dim", static_cast<int>(2 * geom.element_count()));
            if (n.input_dim != 2 * geom.element_count())
                fail(ErrorKind::config, "network.input_dim must equal twice the element count");
            n.hidden_widths = s.get<std::vector<int>>("hidden_widths", n.hidden_widths);
            n.dense_connectivity = s.get<bool>("dense_connectivity", n.dense_connectivity);
            n.head_classes = s.get<int>("head_classes", n.head_classes);
            n.head_regression_sizes = s.get<std::vector<int>>("head_regression_sizes", n.head_regression_sizes);
            // Angle normalization follows the training field of view unless given.
            n.angle_center_deg = s.get<double>("angle_center_deg", dist.fov_center());
            n.angle_half_width_deg = s.get<double>("angle_half_width_deg", dist.fov_half_width());
            s.finish();
            try
            {
                n.validate();
            }
            catch (const Error &e)
            {
                fail(ErrorKind::config, std::string("network: ") + e.what());
            }
            return n;
        }

        void revalidate(const char *what, const std::function<void()> &fn)
        {
            try
            {
                fn();
            }
            catch (const Error &e)
            {
                if (e.kind() == ErrorKind::config)
                    throw;
                fail(ErrorKind::config, std::string(what) + ": " + e.what());
            }
        }
    }

    void CliConfig::set_seed(std::uint64_t s)
    {
        seed = s;
        training.seed = s;
        sweep.seed = s;
    }

    CliConfig parse_cli_config(const nlohmann::json &document)
    {
        JsonSection root(document, "config");
        CliConfig c;
        c.seed = root.get<std::uint64_t>("seed", c.seed);
        revalidate("geometry", [&]
                   { c.geometry = geometry_from_json(root.section("geometry")); });
        revalidate("scene_distribution", [&]
                   { c.scene_distribution = distribution_from_json(root.section("scene_distribution")); });
        GridSpec grid_defaults;
        grid_defaults.fov_deg = c.scene_distribution.fov_deg;
        revalidate("grid", [&]
                   { c.grid = grid_from_json(root.section("grid"), grid_defaults); });
        c.network = network_from_json(root.section("network"), c.geometry, c.scene_distribution);

        {
            JsonSection t = root.section("training");
            TrainConfig &tc = c.training;
            tc.geometry = c.geometry;
            tc.scene_distribution = c.scene_distribution;
            tc.network = c.network;
            tc.seed = c.seed;
            tc.batch_size = t.get<int>("batch_size", tc.batch_size);
            tc.iterations = t.get<std::int64_t>("iterations", tc.iterations);
            tc.lr = t.get<double>("lr", tc.lr);
            tc.momentum = t.get<double>("momentum", tc.momentum);
            tc.lr_decay_factor = t.get<double>("lr_decay_factor", tc.lr_decay_factor);
            tc.lr_decay_every = t.get<std::int64_t>("lr_decay_every", tc.lr_decay_every);
            tc.loss_weight = t.get<double>("loss_weight", tc.loss_weight);
            tc.validation_size = t.get<int>("validation_size", tc.validation_size);
            tc.checkpoint_every = t.get<std::int64_t>("checkpoint_every", tc.checkpoint_every);
            t.finish();
            revalidate("training", [&]
                       { tc.validate(); });
        }

        {
            JsonSection s = root.section("sweep");
            SweepConfig &sc = c.sweep;
            sc.geometry = c.geometry;
            sc.grid = c.grid;
            sc.seed = c.seed;
            if (s.has("scene_distribution"))
                revalidate("sweep.scene_distribution", [&]
                           { sc.scene_distribution = distribution_from_json(s.section("scene_distribution")); });
            else
            {
                s.section("scene_distribution");
                sc.scene_distribution = c.scene_distribution;
            }
            if (s.has("methods"))
                c.eval_methods = s.get<std::vector<std::string>>("methods", {});
            else
                s.get<std::vector<std::string>>("methods", {});
            if (s.has("order_methods"))
                c.order_methods = s.get<std::vector<std::string>>("order_methods", {});
            else
                s.get<std::vector<std::string>>("order_methods", {});
            if (s.has("checkpoint"))
                c.sweep_checkpoint = s.get<std::string>("checkpoint", "");
            else
                s.get<std::string>("checkpoint", "");
            sc.snr_points_db = s.get<std::vector<double>>("snr_points_db", sc.snr_points_db);
            sc.trials_per_point = s.get<int>("trials_per_point", sc.trials_per_point);
            if (s.has("impairment"))
                revalidate("sweep.impairment", [&]
                           { sc.impairment = impairment_from_json(s.section("impairment")); });
            else
                s.section("impairment");
            sc.ap_iterations = s.get<int>("ap_iterations", sc.ap_iterations);
            sc.music_subarray = s.get<int>("music_subarray", sc.music_subarray);
            sc.ml.max_sources = s.get<int>("ml_max_sources", sc.ml.max_sources);
            sc.ml.operation_budget = s.get<double>("ml_operation_budget", sc.ml.operation_budget);
            sc.measure_runtime = s.get<bool>("measure_runtime", sc.measure_runtime);
            sc.max_error_fraction = s.get<double>("max_error_fraction", sc.max_error_fraction);
            s.finish();
            // Method availability is checked once the command resolves its list.
            SweepConfig probe = sc;
            probe.methods = {"ap"};
            revalidate("sweep", [&]
                       { probe.validate(); });
        }
        root.finish();
        return c;
    }

    CliConfig load_cli_config(const std::string &path)
    {
        if (path.empty())
            return parse_cli_config(nlohmann::json::object());
        if (!std::filesystem::exists(path))
            fail(ErrorKind::missing, "config file not found: " + path);
        nlohmann::json doc;
        try
        {
            doc = nlohmann::json::parse(read_text_file(path));
        }
        catch (const nlohmann::json::exception &e)
        {
            fail(ErrorKind::config, "config file " + path + " is not valid JSON: " + e.what());
        }
        return parse_cli_config(doc);
    }

    nlohmann::json cli_config_to_json(const CliConfig &c)
    {
        const TrainConfig &t = c.training;
        const SweepConfig &s = c.sweep;
        nlohmann::json sweep = {
            {"scene_distribution", to_json(s.scene_distribution)},
            {"snr_points_db", s.snr_points_db},
            {"trials_per_point", s.trials_per_point},
            {"ap_iterations", s.ap_iterations},
            {"music_subarray", s.music_subarray},
            {"ml_max_sources", s.ml.max_sources},
            {"ml_operation_budget", s.ml.operation_budget},
            {"measure_runtime", s.measure_runtime},
            {"max_error_fraction", s.max_error_fraction},
        };
        sweep["methods"] = c.eval_methods ? nlohmann::json(*c.eval_methods) : nlohmann::json(nullptr);
        sweep["order_methods"] = c.order_methods ? nlohmann::json(*c.order_methods) : nlohmann::json(nullptr);
        sweep["checkpoint"] = c.sweep_checkpoint ? nlohmann::json(*c.sweep_checkpoint) : nlohmann::json(nullptr);
        sweep["impairment"] = s.impairment ? to_json(*s.impairment) : nlohmann::json(nullptr);
        return {
            {"seed", c.seed},
            {"geometry", to_json(c.geometry)},
            {"scene_distribution", to_json(c.scene_distribution)},
            {"grid", to_json(c.grid)},
            {"network", spec_to_json(c.network)},
            {"training",
             {{"batch_size", t.batch_size},
              {"iterations", t.iterations},
              {"lr", t.lr},
              {"momentum", t.momentum},
              {"lr_decay_factor", t.lr_decay_factor},
              {"lr_decay_every", t.lr_decay_every},
              {"loss_weight", t.loss_weight},
              {"validation_size", t.validation_size},
              {"checkpoint_every", t.checkpoint_every}}},
            {"sweep", sweep},
        };
    }

    std::vector<std::string> resolve_eval_methods(const CliConfig &config, bool have_network)
    {
        if (config.eval_methods)
            return *config.eval_methods;
        std::vector<std::string> m{"ap", "omp", "music"};
        if (have_network)
            m.push_back("dnn");
        return m;
    }

    std::vector<std::string> resolve_order_methods(const CliConfig &config, bool have_network)
    {
        if (config.order_methods)
            return *config.order_methods;
        std::vector<std::string> m{"mdl", "aic"};
        if (have_network)
            m.push_back("dnn");
        return m;
    }
}
