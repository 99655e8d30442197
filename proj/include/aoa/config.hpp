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

#ifndef AOA_CONFIG_HPP
#define AOA_CONFIG_HPP

#include "aoa/eval.hpp"
#include "aoa/train.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace aoa
{
    // Top-level document for the command-line tool. Every key is optional;
    // unknown keys are rejected. Sections: geometry, scene_distribution, grid,
    // network, training, sweep.
    struct CliConfig
    {
        std::uint64_t seed = 1;
        ArrayGeometry geometry = ArrayGeometry::uniform_linear();
        SceneDistribution scene_distribution;
        GridSpec grid;
        NetworkSpec network;
        TrainConfig training;
        SweepConfig sweep; // network pointer left empty; methods resolved per command
        std::optional<std::vector<std::string>> eval_methods;
        std::optional<std::vector<std::string>> order_methods;
        std::optional<std::string> sweep_checkpoint;

        // Re-derives seeds of the nested configs after a --seed override.
        void set_seed(std::uint64_t s);
    };

    CliConfig parse_cli_config(const nlohmann::json &document);

    // Empty path: all defaults.
    CliConfig load_cli_config(const std::string &path);

    // Effective configuration with every default filled in.
    nlohmann::json cli_config_to_json(const CliConfig &config);

    // Method list for the eval / order commands; "dnn" is appended to the
    // defaults when a network is available.
    std::vector<std::string> resolve_eval_methods(const CliConfig &config, bool have_network);
    std::vector<std::string> resolve_order_methods(const CliConfig &config, bool have_network);
}

#endif
