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

#ifndef AOA_TRAIN_HPP
#define AOA_TRAIN_HPP

#include "aoa/checkpoint.hpp"
#include "aoa/net.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aoa
{
    struct TrainConfig
    {
        ArrayGeometry geometry = ArrayGeometry::uniform_linear();
        SceneDistribution scene_distribution;
        NetworkSpec network;
        int batch_size = 4000;
        std::int64_t iterations = 1000;
        double lr = 0.01;
        double momentum = 0.9;
        double lr_decay_factor = 0.5;
        std::int64_t lr_decay_every = 20000;
        double loss_weight = 1.0;
        std::uint64_t seed = 1;
        int validation_size = 1000;
        std::int64_t checkpoint_every = 1000; // also the validation cadence
        unsigned workers = 1;
        std::string out_dir; // empty: keep everything in memory

        // When nonempty every batch cycles through these snapshots instead of
        // drawing fresh scenes (used for memorization checks).
        std::vector<Snapshot> fixed_examples;

        double learning_rate(std::int64_t iteration) const;
        void validate() const;
    };

    struct IterationRecord
    {
        std::int64_t iteration = 0;
        double loss = 0.0;
        double cross_entropy = 0.0;
        double angle_rmse = 0.0;
        double lr = 0.0;

        bool operator==(const IterationRecord &) const = default;
    };

    struct ValidationRecord
    {
        std::int64_t iteration = 0;
        double loss = 0.0;
        double accuracy = 0.0;
        std::array<double, 4> rmse_deg_by_order{}; // NaN when a source count is absent
        std::array<int, 4> count_by_order{};
        double rmse_deg = 0.0; // all examples, true-order heads

        bool operator==(const ValidationRecord &) const = default;
    };

    struct TrainingLog
    {
        std::vector<IterationRecord> iterations;
        std::vector<ValidationRecord> validations;

        std::string iterations_csv() const;
        std::string validations_csv() const;

        nlohmann::json to_json() const;
        static TrainingLog from_json(const nlohmann::json &j);
    };

    // Everything needed to continue training bit-identically.
    struct TrainState
    {
        NetworkParameters params;
        NetworkParameters velocity;
        std::int64_t iteration = 0;
        TrainingLog log;
        std::optional<NetworkParameters> best_params;
        std::int64_t best_iteration = 0;
        double best_loss = 0.0;
    };

    // Snapshot used as training example `index` of `iteration`.
    Snapshot training_example(const TrainConfig &config, std::int64_t iteration, std::size_t index);

    std::vector<Snapshot> validation_set(const TrainConfig &config);

    // Scores externally produced predictions. angles_for_true_order[i] holds the
    // estimates of the head matching example i's true source count.
    ValidationRecord score_predictions(const std::vector<SourceScene> &scenes, const std::vector<int> &predicted_order,
                                       const std::vector<std::vector<double>> &angles_for_true_order);

    ValidationRecord validate(const NetworkParameters &params, const std::vector<Snapshot> &set, double loss_weight = 1.0);

    using TrainObserver = std::function<void(const TrainState &)>;

    // Streams freshly synthesized batches through SGD with momentum up to
    // config.iterations. Pass `resume` to continue from a saved state. When
    // out_dir is set, checkpoint_last / checkpoint_best and CSV logs are written
    // there every checkpoint_every iterations. Throws a numerical error naming
    // the iteration if the loss becomes non-finite.
    TrainState train(const TrainConfig &config, std::optional<TrainState> resume = std::nullopt,
                     const TrainObserver &on_checkpoint = {});

    TrainState load_train_state(const std::string &checkpoint_path);

    nlohmann::json train_config_to_json(const TrainConfig &config);
}

#endif
