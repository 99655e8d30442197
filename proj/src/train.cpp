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

#include "aoa/train.hpp"
#include "aoa/binary_io.hpp"
#include "aoa/errors.hpp"
#include "aoa/parallel.hpp"
#include "aoa/serialization.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace aoa
{
    namespace fs = std::filesystem;

    namespace
    {
        constexpr std::uint64_t training_stream = 1;
        constexpr std::uint64_t validation_stream = 2;
        constexpr std::uint64_t init_stream = 3;

        const double nan = std::numeric_limits<double>::quiet_NaN();
    }

    double TrainConfig::learning_rate(std::int64_t iteration) const
    {
        if (lr_decay_every <= 0)
            return lr;
        const auto steps = (iteration - 1) / lr_decay_every;
        return lr * std::pow(lr_decay_factor, static_cast<double>(steps));
    }

    void TrainConfig::validate() const
    {
        geometry.validate();
        scene_distribution.validate();
        network.validate();
        if (network.input_dim != 2 * geometry.element_count())
            fail(ErrorKind::config, "training: network input_dim must equal twice the element count");
        if (batch_size < 1)
            fail(ErrorKind::config, "training: batch_size must be >= 1");
        if (iterations < 0)
            fail(ErrorKind::config, "training: iterations must be >= 0");
        if (!(lr > 0.0))
            fail(ErrorKind::config, "training: lr must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0))
            fail(ErrorKind::config, "training: momentum must lie in [0, 1)");
        if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
            fail(ErrorKind::config, "training: lr_decay_factor must lie in (0, 1]");
        if (!(loss_weight > 0.0))
            fail(ErrorKind::config, "training: loss_weight must be > 0");
        if (validation_size < 0)
            fail(ErrorKind::config, "training: validation_size must be >= 0");
        if (checkpoint_every < 1)
            fail(ErrorKind::config, "training: checkpoint_every must be >= 1");
    }

    std::string TrainingLog::iterations_csv() const
    {
        std::ostringstream out;
        out << "iteration,loss,ce,rmse,lr\n";
        for (const auto &r : iterations)
            out << r.iteration << ',' << format_number(r.loss) << ',' << format_number(r.cross_entropy) << ','
                << format_number(r.angle_rmse) << ',' << format_number(r.lr) << '\n';
        return out.str();
    }

    std::string TrainingLog::validations_csv() const
    {
        std::ostringstream out;
        out << "iteration,loss,accuracy,rmse_deg,rmse_deg_m1,rmse_deg_m2,rmse_deg_m3,rmse_deg_m4\n";
        for (const auto &r : validations)
        {
            out << r.iteration << ',' << format_number(r.loss) << ',' << format_number(r.accuracy) << ','
                << format_number(r.rmse_deg);
            for (double v : r.rmse_deg_by_order)
                out << ',' << format_number(v);
            out << '\n';
        }
        return out.str();
    }

    nlohmann::json TrainingLog::to_json() const
    {
        // NaN is not representable in JSON; absent source counts are stored as null.
        auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
        nlohmann::json it = nlohmann::json::array();
        for (const auto &r : iterations)
            it.push_back({r.iteration, r.loss, r.cross_entropy, r.angle_rmse, r.lr});
        nlohmann::json val = nlohmann::json::array();
        for (const auto &r : validations)
        {
            nlohmann::json by = nlohmann::json::array();
            for (double v : r.rmse_deg_by_order)
                by.push_back(num(v));
            val.push_back({{"iteration", r.iteration}, {"loss", num(r.loss)}, {"accuracy", num(r.accuracy)},
                           {"rmse_deg", num(r.rmse_deg)}, {"rmse_deg_by_order", by}, {"count_by_order", r.count_by_order}});
        }
        return {{"iterations", it}, {"validations", val}};
    }

    TrainingLog TrainingLog::from_json(const nlohmann::json &j)
    {
        auto num = [](const nlohmann::json &v) { return v.is_null() ? nan : v.get<double>(); };
        TrainingLog log;
        for (const auto &e : j.at("iterations"))
            log.iterations.push_back({e.at(0).get<std::int64_t>(), e.at(1).get<double>(), e.at(2).get<double>(),
                                      e.at(3).get<double>(), e.at(4).get<double>()});
        for (const auto &e : j.at("validations"))
        {
            ValidationRecord r;
            r.iteration = e.at("iteration").get<std::int64_t>();
            r.loss = num(e.at("loss"));
            r.accuracy = num(e.at("accuracy"));
            r.rmse_deg = num(e.at("rmse_deg"));
            for (std::size_t m = 0; m < 4; ++m)
            {
                r.rmse_deg_by_order[m] = num(e.at("rmse_deg_by_order").at(m));
                r.count_by_order[m] = e.at("count_by_order").at(m).get<int>();
            }
            log.validations.push_back(r);
        }
        return log;
    }

    Snapshot training_example(const TrainConfig &config, std::int64_t iteration, std::size_t index)
    {
        if (!config.fixed_examples.empty())
            return config.fixed_examples[index % config.fixed_examples.size()];
        return draw_snapshot(config.geometry, config.scene_distribution,
                             derive_seed(config.seed, {training_stream, static_cast<std::uint64_t>(iteration), index}));
    }

    std::vector<Snapshot> validation_set(const TrainConfig &config)
    {
        std::vector<Snapshot> set(static_cast<std::size_t>(config.validation_size));
        parallel_for(set.size(), config.workers, [&](std::size_t i)
                     { set[i] = draw_snapshot(config.geometry, config.scene_distribution,
                                              derive_seed(config.seed, {validation_stream, i})); });
        return set;
    }

    ValidationRecord score_predictions(const std::vector<SourceScene> &scenes, const std::vector<int> &predicted_order,
                                       const std::vector<std::vector<double>> &angles_for_true_order)
    {
        if (scenes.size() != predicted_order.size() || scenes.size() != angles_for_true_order.size())
            fail(ErrorKind::structural, "score_predictions: inconsistent list lengths");
        ValidationRecord r;
        std::array<double, 4> sq{};
        double sq_all = 0.0;
        int correct = 0;
        for (std::size_t i = 0; i < scenes.size(); ++i)
        {
            const int M = scenes[i].count();
            if (predicted_order[i] == M)
                ++correct;
            const double e = chamfer_rmse(scenes[i].angles_deg, angles_for_true_order[i]);
            sq[static_cast<std::size_t>(M - 1)] += e * e;
            sq_all += e * e;
            ++r.count_by_order[static_cast<std::size_t>(M - 1)];
        }
        const double n = static_cast<double>(scenes.size());
        r.accuracy = scenes.empty() ? nan : correct / n;
        r.rmse_deg = scenes.empty() ? nan : std::sqrt(sq_all / n);
        for (std::size_t m = 0; m < 4; ++m)
            r.rmse_deg_by_order[m] = r.count_by_order[m] ? std::sqrt(sq[m] / r.count_by_order[m]) : nan;
        r.loss = nan;
        return r;
    }

    ValidationRecord validate(const NetworkParameters &params, const std::vector<Snapshot> &set, double loss_weight)
    {
        if (set.empty())
        {
            ValidationRecord r;
            r.loss = r.accuracy = r.rmse_deg = nan;
            r.rmse_deg_by_order.fill(nan);
            return r;
        }
        std::vector<const CVector *> ys;
        std::vector<SourceScene> scenes;
        for (const auto &s : set)
        {
            ys.push_back(&s.y);
            scenes.push_back(s.scene);
        }
        const ForwardTrace trace = infer(params, snapshot_batch(ys));
        const BatchPrediction pred = predict_batch(params, ys);
        std::vector<std::vector<double>> angles;
        for (std::size_t i = 0; i < set.size(); ++i)
            angles.push_back(pred.angles[i][static_cast<std::size_t>(scenes[i].count() - 1)]);
        ValidationRecord r = score_predictions(scenes, pred.order, angles);
        r.loss = compute_loss(trace, scenes, params.spec, loss_weight).total;
        return r;
    }

    namespace
    {
        nlohmann::json state_metadata(const TrainConfig &config, const TrainState &state)
        {
            return {{"kind", "training_state"},
                    {"iteration", state.iteration},
                    {"best_iteration", state.best_iteration},
                    {"best_loss", state.best_loss},
                    {"seed", config.seed},
                    {"config", train_config_to_json(config)},
                    {"log", state.log.to_json()}};
        }

        void write_outputs(const TrainConfig &config, const TrainState &state, bool best_improved)
        {
            if (config.out_dir.empty())
                return;
            fs::create_directories(config.out_dir);
            const fs::path dir(config.out_dir);
            Checkpoint last;
            last.params = state.params;
            last.velocity = state.velocity;
            last.metadata = state_metadata(config, state);
            save_checkpoint((dir / "checkpoint_last.json").string(), last);
            if (best_improved && state.best_params)
                save_network((dir / "checkpoint_best.json").string(), *state.best_params,
                             {{"kind", "best_validation"}, {"iteration", state.best_iteration},
                              {"validation_loss", state.best_loss}, {"seed", config.seed}});
            write_text_file((dir / "training_log.csv").string(), state.log.iterations_csv());
            write_text_file((dir / "validation_log.csv").string(), state.log.validations_csv());
        }
    }

    TrainState train(const TrainConfig &config, std::optional<TrainState> resume, const TrainObserver &on_checkpoint)
    {
        config.validate();

        TrainState state;
        if (resume)
        {
            state = std::move(*resume);
            if (state.params.spec != config.network)
                fail(ErrorKind::mismatch, "train: resumed parameters do not match the configured network");
        }
        else
        {
            Rng rng(derive_seed(config.seed, {init_stream}));
            state.params = init_network(config.network, rng);
            state.velocity = NetworkParameters::zeros(config.network);
            state.best_loss = std::numeric_limits<double>::infinity();
        }

        SgdMomentum optimizer(state.velocity);
        const std::vector<Snapshot> validation = validation_set(config);
        const auto B = static_cast<std::size_t>(config.batch_size);
        std::vector<Snapshot> batch(B);

        while (state.iteration < config.iterations)
        {
            const std::int64_t it = state.iteration + 1;
            const double lr = config.learning_rate(it);

            parallel_for(B, config.workers, [&](std::size_t i)
                         { batch[i] = training_example(config, it, i); });
            std::vector<const CVector *> ys(B);
            std::vector<SourceScene> scenes(B);
            for (std::size_t i = 0; i < B; ++i)
            {
                ys[i] = &batch[i].y;
                scenes[i] = batch[i].scene;
            }

            OutputGradients upstream;
            ForwardTrace trace;
            LossBreakdown loss;
            try
            {
                trace = forward(state.params, snapshot_batch(ys), Mode::train);
                loss = compute_loss(trace, scenes, config.network, config.loss_weight, &upstream);
            }
            catch (const Error &e)
            {
                if (e.kind() != ErrorKind::numerical)
                    throw;
                fail(ErrorKind::numerical, "train: diverged at iteration " + std::to_string(it) + " (" + e.what() + ")");
            }
            if (!std::isfinite(loss.total))
                fail(ErrorKind::numerical, "train: non-finite loss at iteration " + std::to_string(it));

            const NetworkParameters grads = backward(state.params, trace, upstream);
            optimizer.step(state.params, grads, lr, config.momentum);

            state.iteration = it;
            state.log.iterations.push_back({it, loss.total, loss.cross_entropy, loss.angle_rmse, lr});

            if (it % config.checkpoint_every == 0 || it == config.iterations)
            {
                state.velocity = optimizer.velocity();
                ValidationRecord v = validate(state.params, validation, config.loss_weight);
                v.iteration = it;
                state.log.validations.push_back(v);
                bool improved = false;
                if (!validation.empty() && v.loss < state.best_loss)
                {
                    state.best_loss = v.loss;
                    state.best_iteration = it;
                    state.best_params = state.params;
                    improved = true;
                }
                write_outputs(config, state, improved);
                if (on_checkpoint)
                    on_checkpoint(state);
            }
        }
        state.velocity = optimizer.velocity();
        return state;
    }

    TrainState load_train_state(const std::string &checkpoint_path)
    {
        Checkpoint c = load_checkpoint(checkpoint_path);
        if (c.metadata.value("kind", "") != "training_state" || !c.velocity)
            fail(ErrorKind::mismatch, "load_train_state: " + checkpoint_path + " is not a resumable training checkpoint");
        TrainState s;
        s.params = std::move(c.params);
        s.velocity = std::move(*c.velocity);
        try
        {
            s.iteration = c.metadata.at("iteration").get<std::int64_t>();
            s.best_iteration = c.metadata.at("best_iteration").get<std::int64_t>();
            s.best_loss = c.metadata.at("best_loss").is_null() ? std::numeric_limits<double>::infinity()
                                                                : c.metadata.at("best_loss").get<double>();
            s.log = TrainingLog::from_json(c.metadata.at("log"));
        }
        catch (const nlohmann::json::exception &e)
        {
            fail(ErrorKind::corrupt, "load_train_state: malformed metadata: " + std::string(e.what()));
        }
        const auto best = fs::path(checkpoint_path).parent_path() / "checkpoint_best.json";
        if (s.best_iteration > 0 && fs::exists(best))
            s.best_params = load_network(best.string(), &s.params.spec);
        return s;
    }

    nlohmann::json train_config_to_json(const TrainConfig &config)
    {
        return {{"geometry", to_json(config.geometry)},
                {"scene_distribution", to_json(config.scene_distribution)},
                {"network", spec_to_json(config.network)},
                {"batch_size", config.batch_size},
                {"iterations", config.iterations},
                {"lr", config.lr},
                {"momentum", config.momentum},
                {"lr_decay_factor", config.lr_decay_factor},
                {"lr_decay_every", config.lr_decay_every},
                {"loss_weight", config.loss_weight},
                {"seed", config.seed},
                {"validation_size", config.validation_size},
                {"checkpoint_every", config.checkpoint_every},
                {"fixed_examples", config.fixed_examples.size()}};
    }
}
