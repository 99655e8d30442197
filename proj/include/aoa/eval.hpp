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

#ifndef AOA_EVAL_HPP
#define AOA_EVAL_HPP

#include "aoa/classical.hpp"
#include "aoa/model_order.hpp"
#include "aoa/net.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace aoa
{
    // Method tags: bartlett, ml, ap, omp, music, dnn, mdl, aic, crlb.
    // "crlb" reports the deterministic Cramer-Rao bound in the rmse column.
    struct SweepConfig
    {
        std::vector<std::string> methods{"ap", "omp", "music"};
        std::vector<double> snr_points_db{0, 5, 10, 15, 20, 25, 30};
        int trials_per_point = 200;
        ArrayGeometry geometry = ArrayGeometry::uniform_linear();
        SceneDistribution scene_distribution;
        std::optional<ImpairmentParams> impairment;
        GridSpec grid;
        std::uint64_t seed = 1;
        int ap_iterations = 10;
        int music_subarray = 8;
        MlOptions ml;
        std::shared_ptr<const NetworkParameters> network; // required when "dnn" is listed
        unsigned workers = 1;
        bool measure_runtime = false; // wall-clock timing makes the CSV non-reproducible
        double max_error_fraction = 0.01;

        void validate() const;
    };

    struct SweepRow
    {
        std::string method;
        double snr_db = 0.0;
        double rmse_deg = 0.0;
        double rmse_stderr = 0.0;
        double accuracy = 0.0;        // order recovery; NaN for known-order methods
        double accuracy_stderr = 0.0; // binomial standard error
        double mean_runtime_s = 0.0;  // NaN unless measure_runtime
        int trials = 0;               // successful trials
        int failures = 0;
        std::vector<double> squared_errors; // per successful trial, chamfer MSE in deg^2
    };

    struct SweepResult
    {
        std::vector<SweepRow> rows; // method-major, SNR-minor
        // Snapshot seed per (snr point, trial); every method consumed these snapshots.
        std::vector<std::vector<std::uint64_t>> trial_seeds;
        std::optional<std::string> impairment_id;

        const SweepRow &row(const std::string &method, double snr_db) const;
        std::string to_csv() const;
    };

    inline constexpr const char *sweep_csv_header = "method,snr_db,rmse_deg,rmse_stderr,accuracy,mean_runtime_s,trials";

    // Monte-Carlo RMSE: sqrt of the trial average of per-trial chamfer MSE.
    double rmse_metric(const std::vector<SourceScene> &truth, const std::vector<std::vector<double>> &estimates);

    // Snapshots used at one SNR point: scenes depend only on the trial index,
    // noise on (point, trial); the impairment (if any) is applied afterwards.
    std::vector<Snapshot> sweep_snapshots(const SweepConfig &config, std::size_t snr_index,
                                          const std::optional<ImpairmentSpec> &impairment);

    std::optional<ImpairmentSpec> sweep_impairment(const SweepConfig &config);

    SweepResult run_sweep(const SweepConfig &config);

    // Order-recovery sweep; methods must be drawn from {dnn, mdl, aic}.
    SweepResult order_accuracy_sweep(const SweepConfig &config);

    nlohmann::json sweep_config_to_json(const SweepConfig &config);

    // Deterministic single-snapshot CRB, per-source standard deviation in degrees.
    std::vector<double> crlb(const SourceScene &scene, const ArrayGeometry &geometry, double snr_db);
    std::vector<double> crlb_for_noise_variance(const SourceScene &scene, const ArrayGeometry &geometry, double noise_variance);

    struct ComplexityRow
    {
        std::string method;
        std::string formula;
        double operations = 0.0;
        double measured_seconds = 0.0; // NaN when not measured
    };

    struct ComplexityQuery
    {
        int element_count = 16;
        int sources = 4;
        GridSpec grid;
        int ap_iterations = 10;
        NetworkSpec network;
        bool measure = false;
        MlOptions ml;
        std::uint64_t seed = 1;
    };

    // Grid size used by the formulas: P = FOV width / step.
    double complexity_grid_points(const GridSpec &grid);

    double ml_operation_count(int N, int M, double P);
    double ap_operation_count(int N, double P, int K);
    double dnn_operation_count(const NetworkSpec &spec);     // widest layer squared
    double dnn_multiply_accumulates(const NetworkSpec &spec); // exact MACs per inference

    std::vector<ComplexityRow> complexity_report(const std::vector<std::string> &methods, const ComplexityQuery &query);
    std::string complexity_csv(const std::vector<ComplexityRow> &rows);
}

#endif
