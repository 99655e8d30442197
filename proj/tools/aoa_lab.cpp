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

#include "aoa/checkpoint.hpp"
#include "aoa/config.hpp"
#include "aoa/dataset.hpp"
#include "aoa/eval.hpp"
#include "aoa/parallel.hpp"
#include "aoa/serialization.hpp"
#include "aoa/train.hpp"
#include "aoa/binary_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace aoa;

namespace
{
    enum ExitCode
    {
        exit_ok = 0,
        exit_config = 2,
        exit_missing = 3,
        exit_runtime = 4
    };

    struct Options
    {
        std::string config_path;
        std::string out;
        std::optional<std::uint64_t> seed;
        std::optional<unsigned> workers;
        std::string checkpoint;
        bool resume = false;
        std::size_t count = 1000;
        bool verbose = false;
    };

    unsigned resolve_workers(const Options &o)
    {
        if (o.workers)
            return std::max(1u, *o.workers);
        if (const char *env = std::getenv("AOA_LAB_WORKERS"))
        {
            try
            {
                const long v = std::stol(env);
                if (v >= 1)
                    return static_cast<unsigned>(v);
            }
            catch (const std::exception &)
            {
            }
            fail(ErrorKind::config, std::string("AOA_LAB_WORKERS must be a positive integer, got '") + env + "'");
        }
        return default_workers();
    }

    CliConfig load(const Options &o)
    {
        CliConfig c = load_cli_config(o.config_path);
        if (o.seed)
            c.set_seed(*o.seed);
        const unsigned w = resolve_workers(o);
        c.training.workers = w;
        c.sweep.workers = w;
        c.sweep.ml.workers = 1; // trials are already parallel
        return c;
    }

    fs::path prepare_out(const Options &o, const CliConfig &c, const char *command)
    {
        const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
        fs::create_directories(dir);
        nlohmann::json echo = cli_config_to_json(c);
        echo["command"] = command;
        write_text_file((dir / "effective_config.json").string(), echo.dump(2) + "\n");
        return dir;
    }

    std::shared_ptr<const NetworkParameters> load_optional_network(const Options &o, const CliConfig &c)
    {
        std::string path = o.checkpoint;
        if (path.empty() && c.sweep_checkpoint)
            path = *c.sweep_checkpoint;
        if (path.empty())
            return nullptr;
        return std::make_shared<const NetworkParameters>(load_network(path));
    }

    int cmd_simulate(const Options &o)
    {
        const CliConfig c = load(o);
        const fs::path dir = prepare_out(o, c, "simulate");
        const Dataset ds = generate_dataset(c.geometry, c.scene_distribution, o.count, c.seed, c.training.workers);
        const fs::path file = dir / "dataset.aoa";
        write_dataset(file.string(), ds);
        nlohmann::json sidecar = {
            {"format", "AOA1"},
            {"version", dataset_format_version},
            {"records", o.count},
            {"seed", c.seed},
            {"record_seed", "derive_seed(seed, [index])"},
            {"geometry", to_json(c.geometry)},
            {"scene_distribution", to_json(c.scene_distribution)},
        };
        write_text_file((dir / "dataset.json").string(), sidecar.dump(2) + "\n");
        std::cout << "wrote " << o.count << " records to " << file.string() << "\n";
        return exit_ok;
    }

    int cmd_train(const Options &o)
    {
        CliConfig c = load(o);
        const fs::path dir = prepare_out(o, c, "train");
        c.training.out_dir = dir.string();
        std::optional<TrainState> resume;
        if (o.resume)
        {
            const std::string path = o.checkpoint.empty() ? (dir / "checkpoint_last.json").string() : o.checkpoint;
            resume = load_train_state(path);
        }
        const bool verbose = o.verbose;
        const TrainState state = train(c.training, resume, [verbose](const TrainState &s)
                                       {
            if (!verbose || s.log.validations.empty())
                return;
            const auto &v = s.log.validations.back();
            std::cout << "iteration " << v.iteration << " validation loss " << format_number(v.loss)
                      << " accuracy " << format_number(v.accuracy) << " rmse_deg " << format_number(v.rmse_deg) << "\n"; });
        std::cout << "trained to iteration " << state.iteration << " (best validation at " << state.best_iteration
                  << ") in " << dir.string() << "\n";
        return exit_ok;
    }

    void write_sweep(const fs::path &dir, const std::string &stem, const SweepConfig &config, const SweepResult &r)
    {
        write_text_file((dir / (stem + ".csv")).string(), r.to_csv());
        nlohmann::json meta = {
            {"config", sweep_config_to_json(config)},
            {"trial_seeds", r.trial_seeds},
            {"impairment_id", r.impairment_id ? nlohmann::json(*r.impairment_id) : nlohmann::json(nullptr)},
            {"csv_header", sweep_csv_header},
        };
        write_text_file((dir / (stem + ".json")).string(), meta.dump(2) + "\n");
    }

    int cmd_eval(const Options &o)
    {
        CliConfig c = load(o);
        const fs::path dir = prepare_out(o, c, "eval");
        c.sweep.network = load_optional_network(o, c);
        c.sweep.methods = resolve_eval_methods(c, c.sweep.network != nullptr);
        const SweepResult r = run_sweep(c.sweep);
        write_sweep(dir, "sweep", c.sweep, r);

        ComplexityQuery q;
        q.element_count = static_cast<int>(c.geometry.element_count());
        q.sources = c.sweep.scene_distribution.max_sources;
        q.grid = c.grid;
        q.ap_iterations = c.sweep.ap_iterations;
        q.network = c.sweep.network ? c.sweep.network->spec : c.network;
        write_text_file((dir / "complexity.csv").string(), complexity_csv(complexity_report({"ml", "ap", "dnn", "dnn_macs"}, q)));
        std::cout << r.to_csv();
        return exit_ok;
    }

    int cmd_order(const Options &o)
    {
        CliConfig c = load(o);
        const fs::path dir = prepare_out(o, c, "order");
        c.sweep.network = load_optional_network(o, c);
        c.sweep.methods = resolve_order_methods(c, c.sweep.network != nullptr);
        const SweepResult r = order_accuracy_sweep(c.sweep);
        write_sweep(dir, "order", c.sweep, r);
        std::cout << r.to_csv();
        return exit_ok;
    }

    int exit_code_for(ErrorKind k)
    {
        switch (k)
        {
        case ErrorKind::config:
            return exit_config;
        case ErrorKind::missing:
            return exit_missing;
        default:
            return exit_runtime;
        }
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"aoa_lab: single-snapshot angle-of-arrival laboratory"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub)
    {
        sub->add_option("--config", o.config_path, "JSON configuration file");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Override the configured seed");
        sub->add_option("--workers", o.workers, "Worker threads (fallback: AOA_LAB_WORKERS)")->check(CLI::PositiveNumber);
        sub->add_flag("--verbose,-v", o.verbose, "Progress output");
    };
    auto *simulate = app.add_subcommand("simulate", "Generate a snapshot dataset");
    common(simulate);
    simulate->add_option("--count", o.count, "Number of records")->check(CLI::PositiveNumber);
    auto *trainc = app.add_subcommand("train", "Train the network");
    common(trainc);
    trainc->add_option("--checkpoint", o.checkpoint, "Checkpoint to resume from (default: <out>/checkpoint_last.json)");
    trainc->add_flag("--resume", o.resume, "Continue from a checkpoint");
    auto *evalc = app.add_subcommand("eval", "RMSE-versus-SNR sweep");
    common(evalc);
    evalc->add_option("--checkpoint", o.checkpoint, "Network checkpoint (adds the dnn method)");
    auto *orderc = app.add_subcommand("order", "Source-count accuracy sweep");
    common(orderc);
    orderc->add_option("--checkpoint", o.checkpoint, "Network checkpoint (adds the dnn method)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    try
    {
        if (*simulate)
            return cmd_simulate(o);
        if (*trainc)
            return cmd_train(o);
        if (*evalc)
            return cmd_eval(o);
        return cmd_order(o);
    }
    catch (const Error &e)
    {
        std::cerr << "aoa_lab: " << to_string(e.kind()) << " error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    }
    catch (const std::exception &e)
    {
        std::cerr << "aoa_lab: runtime error: " << e.what() << "\n";
        return exit_runtime;
    }
}
