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

#include "aoa/eval.hpp"
#include "aoa/checkpoint.hpp"
#include "aoa/errors.hpp"
#include "aoa/parallel.hpp"
#include "aoa/serialization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace aoa
{
    namespace
    {
        const double nan = std::numeric_limits<double>::quiet_NaN();

        constexpr std::uint64_t scene_stream = 11;
        constexpr std::uint64_t noise_stream = 12;
        constexpr std::uint64_t impairment_stream = 13;
        constexpr std::uint64_t complexity_stream = 14;

        const std::set<std::string> known_methods{"bartlett", "ml", "ap", "omp", "music", "dnn", "mdl", "aic", "crlb"};
        const std::set<std::string> order_methods{"dnn", "mdl", "aic"};

        struct TrialOutcome
        {
            bool ok = false;
            double squared_error = nan; // chamfer MSE
            bool order_known = false;
            bool order_correct = false;
            double runtime = 0.0;
        };

        double chamfer_mse(const std::vector<double> &truth, const std::vector<double> &est)
        {
            const double r = chamfer_rmse(truth, est);
            return r * r;
        }
    }

    void SweepConfig::validate() const
    {
        if (methods.empty())
            fail(ErrorKind::config, "sweep: methods must be nonempty");
        for (const auto &m : methods)
            if (!known_methods.count(m))
                fail(ErrorKind::config, "sweep: unknown method '" + m + "'");
        if (std::set<std::string>(methods.begin(), methods.end()).size() != methods.size())
            fail(ErrorKind::config, "sweep: duplicate method");
        if (trials_per_point < 1)
            fail(ErrorKind::config, "sweep: trials_per_point must be >= 1");
        if (snr_points_db.empty())
            fail(ErrorKind::config, "sweep: snr_points_db must be nonempty");
        for (double s : snr_points_db)
            if (!std::isfinite(s))
                fail(ErrorKind::config, "sweep: SNR points must be finite");
        geometry.validate();
        scene_distribution.validate();
        grid.validate();
        if (impairment)
            impairment->validate();
        if (ap_iterations < 1)
            fail(ErrorKind::config, "sweep: ap_iterations must be >= 1");
        if (music_subarray < 2 || music_subarray > geometry.element_count())
            fail(ErrorKind::config, "sweep: music_subarray must lie in 2..N");
        if (std::find(methods.begin(), methods.end(), "dnn") != methods.end())
        {
            if (!network)
                fail(ErrorKind::missing, "sweep: method 'dnn' requires a network checkpoint");
            if (network->spec.input_dim != 2 * geometry.element_count())
                fail(ErrorKind::mismatch, "sweep: network input size does not match the array");
        }
        if (!(max_error_fraction >= 0.0))
            fail(ErrorKind::config, "sweep: max_error_fraction must be >= 0");
    }

    const SweepRow &SweepResult::row(const std::string &method, double snr_db) const
    {
        for (const auto &r : rows)
            if (r.method == method && r.snr_db == snr_db)
                return r;
        fail(ErrorKind::missing, "sweep result has no row for " + method + " at " + std::to_string(snr_db) + " dB");
    }

    std::string SweepResult::to_csv() const
    {
        std::ostringstream out;
        out << sweep_csv_header << '\n';
        for (const auto &r : rows)
            out << r.method << ',' << format_number(r.snr_db) << ',' << format_number(r.rmse_deg) << ','
                << format_number(r.rmse_stderr) << ',' << format_number(r.accuracy) << ','
                << format_number(r.mean_runtime_s) << ',' << r.trials << '\n';
        return out.str();
    }

    double rmse_metric(const std::vector<SourceScene> &truth, const std::vector<std::vector<double>> &estimates)
    {
        if (truth.size() != estimates.size() || truth.empty())
            fail(ErrorKind::structural, "rmse_metric: truth and estimate lists must be paired and nonempty");
        double s = 0.0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            s += chamfer_mse(truth[i].angles_deg, estimates[i]);
        return std::sqrt(s / static_cast<double>(truth.size()));
    }

    std::optional<ImpairmentSpec> sweep_impairment(const SweepConfig &config)
    {
        if (!config.impairment)
            return std::nullopt;
        Rng rng(derive_seed(config.seed, {impairment_stream}));
        return realize_impairment(*config.impairment, config.geometry.element_count(), rng);
    }

    std::vector<Snapshot> sweep_snapshots(const SweepConfig &config, std::size_t snr_index,
                                          const std::optional<ImpairmentSpec> &impairment)
    {
        const double snr = config.snr_points_db.at(snr_index);
        std::vector<Snapshot> out(static_cast<std::size_t>(config.trials_per_point));
        parallel_for(out.size(), config.workers, [&](std::size_t t)
                     {
            Rng scene_rng(derive_seed(config.seed, {scene_stream, t}));
            const SourceScene scene = sample_scene(config.scene_distribution, scene_rng);
            const std::uint64_t noise_seed = derive_seed(config.seed, {noise_stream, snr_index, t});
            Rng noise_rng(noise_seed);
            Snapshot s = synthesize_snapshot(config.geometry, scene,
                                             config.scene_distribution.noise_enabled ? std::optional<double>(snr) : std::nullopt,
                                             noise_rng);
            s.seed = noise_seed;
            out[t] = impairment ? apply_impairment(*impairment, s) : s; });
        return out;
    }

    namespace
    {
        SweepRow aggregate(const std::string &method, double snr, const std::vector<TrialOutcome> &outcomes,
                           bool measure_runtime, double max_error_fraction)
        {
            SweepRow row;
            row.method = method;
            row.snr_db = snr;
            int order_trials = 0;
            int correct = 0;
            double runtime = 0.0;
            for (const auto &o : outcomes)
            {
                if (!o.ok)
                {
                    ++row.failures;
                    continue;
                }
                ++row.trials;
                runtime += o.runtime;
                if (!std::isnan(o.squared_error))
                    row.squared_errors.push_back(o.squared_error);
                if (o.order_known)
                {
                    ++order_trials;
                    correct += o.order_correct ? 1 : 0;
                }
            }
            if (row.failures > max_error_fraction * static_cast<double>(outcomes.size()))
                fail(ErrorKind::estimation, "sweep: method '" + method + "' failed on " + std::to_string(row.failures) +
                                                " of " + std::to_string(outcomes.size()) + " trials at " +
                                                format_number(snr) + " dB");

            const auto n = static_cast<double>(row.squared_errors.size());
            if (n > 0)
            {
                double mean = 0.0;
                for (double e : row.squared_errors)
                    mean += e;
                mean /= n;
                double var = 0.0;
                for (double e : row.squared_errors)
                    var += (e - mean) * (e - mean);
                var = n > 1 ? var / (n - 1) : 0.0;
                row.rmse_deg = std::sqrt(mean);
                // Delta method: se(sqrt(m)) = se(m) / (2 sqrt(m)).
                row.rmse_stderr = row.rmse_deg > 0.0 ? std::sqrt(var / n) / (2.0 * row.rmse_deg) : 0.0;
            }
            else
            {
                row.rmse_deg = nan;
                row.rmse_stderr = nan;
            }
            if (order_trials > 0)
            {
                const double p = static_cast<double>(correct) / order_trials;
                row.accuracy = p;
                row.accuracy_stderr = std::sqrt(p * (1.0 - p) / order_trials);
            }
            else
            {
                row.accuracy = nan;
                row.accuracy_stderr = nan;
            }
            row.mean_runtime_s = measure_runtime && row.trials > 0 ? runtime / row.trials : nan;
            return row;
        }
    }

    SweepResult run_sweep(const SweepConfig &config)
    {
        config.validate();
        const auto impairment = sweep_impairment(config);
        const std::size_t P = config.grid.point_count();
        const SteeringDictionary dict(config.geometry, config.grid, P <= 2500);
        std::optional<SteeringDictionary> sub_dict;
        if (std::find(config.methods.begin(), config.methods.end(), "music") != config.methods.end())
            sub_dict.emplace(config.geometry.leading(config.music_subarray), config.grid);

        SweepResult result;
        if (impairment)
            result.impairment_id = impairment->id();
        std::vector<std::vector<SweepRow>> rows_by_method(config.methods.size());
        for (std::size_t j = 0; j < config.snr_points_db.size(); ++j)
        {
            const double snr = config.snr_points_db[j];
            const auto snaps = sweep_snapshots(config, j, impairment);
            std::vector<std::uint64_t> seeds;
            for (const auto &s : snaps)
                seeds.push_back(s.seed);
            result.trial_seeds.push_back(seeds);

            for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
            {
                const auto &method = config.methods[mi];
                std::vector<TrialOutcome> outcomes(snaps.size());

                if (method == "dnn")
                {
                    std::vector<const CVector *> ys;
                    for (const auto &s : snaps)
                        ys.push_back(&s.y);
                    const auto start = std::chrono::steady_clock::now();
                    const BatchPrediction pred = predict_batch(*config.network, ys);
                    const double per = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
                                       static_cast<double>(snaps.size());
                    for (std::size_t t = 0; t < snaps.size(); ++t)
                    {
                        const auto &scene = snaps[t].scene;
                        auto &o = outcomes[t];
                        o.ok = true;
                        o.runtime = per;
                        o.order_known = true;
                        o.order_correct = pred.order[t] == scene.count();
                        o.squared_error = chamfer_mse(scene.angles_deg, pred.angles[t][static_cast<std::size_t>(scene.count() - 1)]);
                    }
                }
                else
                {
                    parallel_for(snaps.size(), config.workers, [&](std::size_t t)
                                 {
                        const auto &snap = snaps[t];
                        const int M = snap.scene.count();
                        auto &o = outcomes[t];
                        const auto start = std::chrono::steady_clock::now();
                        try
                        {
                            if (method == "mdl" || method == "aic")
                            {
                                const auto R = spatial_smooth(snap.y, config.music_subarray);
                                const auto tr = method == "mdl" ? mdl_order(R) : aic_order(R);
                                o.order_known = true;
                                o.order_correct = tr.clamped == M;
                            }
                            else if (method == "crlb")
                            {
                                if (!snap.snr_db)
                                    fail(ErrorKind::domain, "crlb: undefined without noise");
                                const auto bound = crlb(snap.scene, config.geometry, *snap.snr_db);
                                double s = 0.0;
                                for (double b : bound)
                                    s += b * b;
                                o.squared_error = s / static_cast<double>(bound.size());
                            }
                            else
                            {
                                EstimateResult r;
                                if (method == "bartlett")
                                    r = bartlett_estimate(snap.y, M, dict);
                                else if (method == "ml")
                                    r = ml_estimate(snap.y, M, dict, config.ml);
                                else if (method == "ap")
                                    r = ap_estimate(snap.y, M, dict, config.ap_iterations);
                                else if (method == "omp")
                                    r = omp_estimate(snap.y, M, dict);
                                else if (method == "music")
                                    r = music_estimate(spatial_smooth(snap.y, config.music_subarray), M, *sub_dict);
                                o.squared_error = chamfer_mse(snap.scene.angles_deg, r.angles_deg);
                            }
                            o.ok = true;
                        }
                        catch (const Error &e)
                        {
                            if (e.kind() == ErrorKind::budget)
                                throw;
                            o.ok = false;
                        }
                        o.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); });
                }
                rows_by_method[mi].push_back(aggregate(method, snr, outcomes, config.measure_runtime, config.max_error_fraction));
            }
        }
        for (auto &rows : rows_by_method)
            for (auto &r : rows)
                result.rows.push_back(std::move(r));
        return result;
    }

    SweepResult order_accuracy_sweep(const SweepConfig &config)
    {
        for (const auto &m : config.methods)
            if (!order_methods.count(m))
                fail(ErrorKind::config, "order sweep: method '" + m + "' is not an order estimator (use dnn, mdl, aic)");
        return run_sweep(config);
    }

    nlohmann::json sweep_config_to_json(const SweepConfig &config)
    {
        nlohmann::json j = {
            {"methods", config.methods},
            {"snr_points_db", config.snr_points_db},
            {"trials_per_point", config.trials_per_point},
            {"geometry", to_json(config.geometry)},
            {"scene_distribution", to_json(config.scene_distribution)},
            {"grid", to_json(config.grid)},
            {"seed", config.seed},
            {"ap_iterations", config.ap_iterations},
            {"music_subarray", config.music_subarray},
            {"ml_max_sources", config.ml.max_sources},
            {"ml_operation_budget", config.ml.operation_budget},
            {"measure_runtime", config.measure_runtime},
            {"max_error_fraction", config.max_error_fraction},
            {"seed_derivation", "scene(t)=derive(seed,[11,t]); noise(j,t)=derive(seed,[12,j,t]); H=derive(seed,[13])"},
        };
        j["impairment"] = config.impairment ? to_json(*config.impairment) : nlohmann::json(nullptr);
        if (config.network)
            j["network"] = spec_to_json(config.network->spec);
        return j;
    }

    std::vector<double> crlb_for_noise_variance(const SourceScene &scene, const ArrayGeometry &geometry, double sigma2)
    {
        const int M = scene.count();
        if (M < 1 || scene.gains.size() != scene.angles_deg.size())
            fail(ErrorKind::structural, "crlb: invalid scene");
        if (!(sigma2 > 0.0))
            fail(ErrorKind::domain, "crlb: noise variance must be positive");
        if (M >= geometry.element_count())
            fail(ErrorKind::degeneracy, "crlb: more sources than the array can resolve");

        const CMatrix A = steering_matrix(geometry, scene.angles_deg);
        CMatrix D(A.rows(), M);
        CVector s(M);
        for (int m = 0; m < M; ++m)
        {
            D.col(m) = steering_derivative(geometry, scene.angles_deg[static_cast<std::size_t>(m)]);
            s(m) = scene.gains[static_cast<std::size_t>(m)];
        }
        CMatrix P_perp;
        try
        {
            P_perp = CMatrix::Identity(A.rows(), A.rows()) - projector(A);
        }
        catch (const ConditioningError &e)
        {
            fail(ErrorKind::degeneracy, std::string("crlb: steering matrix is singular (merged sources): ") + e.what());
        }
        const CMatrix H = D.adjoint() * P_perp * D;
        const CMatrix S = s * s.adjoint();
        const RMatrix F = (2.0 / sigma2) * H.cwiseProduct(S.transpose()).real();

        Eigen::SelfAdjointEigenSolver<RMatrix> es(F);
        if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
            fail(ErrorKind::degeneracy, "crlb: Fisher information is singular");
        const RMatrix C = F.inverse();
        std::vector<double> out(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m)
            out[static_cast<std::size_t>(m)] = rad2deg(std::sqrt(C(m, m)));
        return out;
    }

    std::vector<double> crlb(const SourceScene &scene, const ArrayGeometry &geometry, double snr_db)
    {
        return crlb_for_noise_variance(scene, geometry, noise_variance(snr_db));
    }

    double complexity_grid_points(const GridSpec &grid)
    {
        return std::round((grid.fov_deg.second - grid.fov_deg.first) / grid.step_deg);
    }

    double ml_operation_count(int N, int M, double P)
    {
        return (static_cast<double>(N) * N + std::pow(M, 3)) * std::pow(P, M);
    }

    double ap_operation_count(int N, double P, int K)
    {
        return static_cast<double>(N) * N * P * K;
    }

    double dnn_operation_count(const NetworkSpec &spec)
    {
        const double w = *std::max_element(spec.hidden_widths.begin(), spec.hidden_widths.end());
        return w * w;
    }

    double dnn_multiply_accumulates(const NetworkSpec &spec)
    {
        double macs = 0.0;
        for (std::size_t l = 0; l < spec.hidden_widths.size(); ++l)
            macs += static_cast<double>(spec.layer_input_dim(l)) * spec.hidden_widths[l];
        return macs + static_cast<double>(spec.head_input_dim()) * spec.total_outputs();
    }

    std::vector<ComplexityRow> complexity_report(const std::vector<std::string> &methods, const ComplexityQuery &q)
    {
        const double P = complexity_grid_points(q.grid);
        std::optional<Snapshot> probe;
        std::optional<SteeringDictionary> dict;
        if (q.measure)
        {
            const ArrayGeometry geom = ArrayGeometry::uniform_linear(q.element_count);
            SceneDistribution d;
            d.fov_deg = q.grid.fov_deg;
            d.min_sources = d.max_sources = std::min(q.sources, 4);
            d.snr_range_db = {20.0, 20.0};
            probe = draw_snapshot(geom, d, derive_seed(q.seed, {complexity_stream}));
            dict.emplace(geom, q.grid);
        }

        std::vector<ComplexityRow> rows;
        for (const auto &m : methods)
        {
            ComplexityRow r;
            r.method = m;
            r.measured_seconds = nan;
            if (m == "ml")
            {
                r.formula = "(N^2+M^3)*P^M";
                r.operations = ml_operation_count(q.element_count, q.sources, P);
                if (probe && q.sources <= q.ml.max_sources && r.operations <= q.ml.operation_budget)
                    r.measured_seconds = ml_estimate(probe->y, q.sources, *dict, q.ml).runtime_seconds;
            }
            else if (m == "ap")
            {
                r.formula = "N^2*P*K";
                r.operations = ap_operation_count(q.element_count, P, q.ap_iterations);
                if (probe)
                    r.measured_seconds = ap_estimate(probe->y, q.sources, *dict, q.ap_iterations).runtime_seconds;
            }
            else if (m == "dnn")
            {
                r.formula = "max_width^2";
                r.operations = dnn_operation_count(q.network);
                if (probe && q.network.input_dim == 2 * q.element_count)
                {
                    Rng rng(derive_seed(q.seed, {complexity_stream, 1}));
                    const NetworkParameters net = init_network(q.network, rng);
                    r.measured_seconds = predict(net, probe->y).runtime_seconds;
                }
            }
            else if (m == "dnn_macs")
            {
                r.formula = "sum(fan_in*fan_out)";
                r.operations = dnn_multiply_accumulates(q.network);
            }
            else
                fail(ErrorKind::config, "complexity_report: no formula for method '" + m + "'");
            rows.push_back(r);
        }
        return rows;
    }

    std::string complexity_csv(const std::vector<ComplexityRow> &rows)
    {
        std::ostringstream out;
        out << "method,formula,operations,measured_seconds\n";
        for (const auto &r : rows)
            out << r.method << ',' << r.formula << ',' << format_number(r.operations) << ','
                << format_number(r.measured_seconds) << '\n';
        return out.str();
    }
}
