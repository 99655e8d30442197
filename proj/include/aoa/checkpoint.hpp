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

#ifndef AOA_CHECKPOINT_HPP
#define AOA_CHECKPOINT_HPP

#include "aoa/net.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace aoa
{
    // A checkpoint is two files: `path` holds a JSON manifest (format, version,
    // network spec, metadata, tensor offset table) and `path`.bin holds the raw
    // little-endian float64 tensors back to back.
    struct Checkpoint
    {
        NetworkParameters params;
        std::optional<NetworkParameters> velocity; // optimizer state, for resuming
        nlohmann::json metadata = nlohmann::json::object();
    };

    inline constexpr int checkpoint_format_version = 1;

    nlohmann::json spec_to_json(const NetworkSpec &spec);
    NetworkSpec spec_from_json(const nlohmann::json &j);

    void save_checkpoint(const std::string &path, const Checkpoint &checkpoint);

    // Throws corrupt/version errors on damaged files and a mismatch error when
    // `expected` is given and differs from the recorded spec.
    Checkpoint load_checkpoint(const std::string &path, const NetworkSpec *expected = nullptr);

    void save_network(const std::string &path, const NetworkParameters &params,
                      const nlohmann::json &metadata = nlohmann::json::object());
    NetworkParameters load_network(const std::string &path, const NetworkSpec *expected = nullptr);
}

#endif
