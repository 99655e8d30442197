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

#include "aoa/net.hpp"
#include "aoa/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace aoa
{
    int NetworkSpec::layer_input_dim(std::size_t layer) const
    {
        if (!dense_connectivity || layer == 0)
            return layer == 0 ? input_dim : hidden_widths[layer - 1];
        int dim = input_dim;
        for (std::size_t j = 0; j < layer; ++j)
            dim += hidden_widths[j];
        return dim;
    }

    int NetworkSpec::total_outputs() const
    {
        int total = head_classes;
        for (int s : head_regression_sizes)
            total += s;
        return total;
    }

    void NetworkSpec::validate() const
    {
        if (input_dim < 2 || input_dim % 2 != 0)
            fail(ErrorKind::config, "network: input_dim must be 2N");
        if (hidden_widths.empty())
            fail(ErrorKind::config, "network: hidden_widths must be nonempty");
        for (int w : hidden_widths)
            if (w < 1)
                fail(ErrorKind::config, "network: hidden widths must be positive");
        if (head_classes != 4 || head_regression_sizes != std::vector<int>{1, 2, 3, 4})
            fail(ErrorKind::config, "network: heads must be 4 classes with regression sizes [1,2,3,4]");
        if (!(angle_half_width_deg > 0.0) || !std::isfinite(angle_center_deg))
            fail(ErrorKind::config, "network: angle normalization half-width must be positive");
    }

    std::size_t NetworkParameters::trainable_count() const
    {
        std::size_t n = 0;
        visit_tensors(*this, [&](const std::string &, const double *, Eigen::Index size, bool trainable)
                      { if (trainable) n += static_cast<std::size_t>(size); });
        return n;
    }

    NetworkParameters NetworkParameters::zeros(const NetworkSpec &spec)
    {
        spec.validate();
        NetworkParameters p;
        p.spec = spec;
        for (std::size_t l = 0; l < spec.hidden_widths.size(); ++l)
        {
            const int out = spec.hidden_widths[l];
            const int in = spec.layer_input_dim(l);
            HiddenLayer L;
            L.weight = RMatrix::Zero(out, in);
            L.bias = RVector::Zero(out);
            L.gamma = RVector::Zero(out);
            L.beta = RVector::Zero(out);
            L.running_mean = RVector::Zero(out);
            L.running_var = RVector::Zero(out);
            p.layers.push_back(std::move(L));
        }
        const int h = spec.head_input_dim();
        p.classifier.weight = RMatrix::Zero(spec.head_classes, h);
        p.classifier.bias = RVector::Zero(spec.head_classes);
        for (int m : spec.head_regression_sizes)
            p.regressors.push_back({RMatrix::Zero(m, h), RVector::Zero(m)});
        return p;
    }

    NetworkParameters init_network(const NetworkSpec &spec, Rng &rng)
    {
        NetworkParameters p = NetworkParameters::zeros(spec);
        auto he = [&](RMatrix &W)
        {
            const double sd = std::sqrt(2.0 / static_cast<double>(W.cols()));
            for (Eigen::Index i = 0; i < W.size(); ++i)
                W.data()[i] = rng.normal(0.0, sd);
        };
        for (auto &L : p.layers)
        {
            he(L.weight);
            L.gamma.setOnes();
            L.running_var.setOnes();
        }
        he(p.classifier.weight);
        for (auto &head : p.regressors)
            he(head.weight);
        return p;
    }

    namespace
    {
        void check_finite(const RMatrix &m, const std::string &where)
        {
            if (!m.allFinite())
                fail(ErrorKind::numerical, "forward: non-finite activations in " + where);
        }

        // Stacks the network input and all previous hidden outputs (dense connectivity).
        RMatrix layer_input(const RMatrix &inputs, const std::vector<LayerTrace> &done, bool dense)
        {
            if (done.empty())
                return inputs;
            if (!dense)
                return done.back().output;
            Eigen::Index rows = inputs.rows();
            for (const auto &t : done)
                rows += t.output.rows();
            RMatrix x(rows, inputs.cols());
            Eigen::Index r = 0;
            x.middleRows(r, inputs.rows()) = inputs;
            r += inputs.rows();
            for (const auto &t : done)
            {
                x.middleRows(r, t.output.rows()) = t.output;
                r += t.output.rows();
            }
            return x;
        }

        ForwardTrace run_forward(const NetworkParameters &params, NetworkParameters *stats_sink,
                                 const RMatrix &inputs, Mode mode)
        {
            const auto &spec = params.spec;
            if (inputs.rows() != spec.input_dim)
                fail(ErrorKind::structural, "forward: input has " + std::to_string(inputs.rows()) +
                                                " features, network expects " + std::to_string(spec.input_dim));
            if (inputs.cols() < 1)
                fail(ErrorKind::structural, "forward: empty batch");
            check_finite(inputs, "the input");

            const Eigen::Index B = inputs.cols();
            ForwardTrace trace;
            trace.mode = mode;
            trace.layers.reserve(params.layers.size());
            for (std::size_t l = 0; l < params.layers.size(); ++l)
            {
                const auto &L = params.layers[l];
                LayerTrace t;
                t.input = layer_input(inputs, trace.layers, spec.dense_connectivity);
                t.pre = (L.weight * t.input).colwise() + L.bias;

                RVector mean, var;
                if (mode == Mode::train)
                {
                    mean = t.pre.rowwise().mean();
                    var = (t.pre.colwise() - mean).array().square().rowwise().mean();
                    if (stats_sink)
                    {
                        auto &S = stats_sink->layers[l];
                        const double unbias = B > 1 ? static_cast<double>(B) / static_cast<double>(B - 1) : 1.0;
                        S.running_mean = batchnorm_decay * S.running_mean + (1.0 - batchnorm_decay) * mean;
                        S.running_var = batchnorm_decay * S.running_var + (1.0 - batchnorm_decay) * unbias * var;
                    }
                }
                else
                {
                    mean = L.running_mean;
                    var = L.running_var;
                }
                t.inv_std = (var.array() + batchnorm_epsilon).rsqrt();
                t.normalized = (t.pre.colwise() - mean).array().colwise() * t.inv_std.array();
                t.output = ((t.normalized.array().colwise() * L.gamma.array()).colwise() + L.beta.array()).cwiseMax(0.0);
                check_finite(t.output, "hidden layer " + std::to_string(l));
                trace.layers.push_back(std::move(t));
            }

            const RMatrix &h = trace.layers.back().output;
            trace.logits = (params.classifier.weight * h).colwise() + params.classifier.bias;
            check_finite(trace.logits, "the classifier head");
            for (std::size_t m = 0; m < params.regressors.size(); ++m)
            {
                trace.angles.push_back((params.regressors[m].weight * h).colwise() + params.regressors[m].bias);
                check_finite(trace.angles.back(), "regression head " + std::to_string(m + 1));
            }
            return trace;
        }

        // Index of the closest estimate for each true angle (ties to the lower index).
        std::vector<std::size_t> closest(const double *est, std::size_t K, const double *truth, std::size_t M)
        {
            std::vector<std::size_t> out(M);
            for (std::size_t m = 0; m < M; ++m)
            {
                std::size_t best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < K; ++k)
                {
                    const double d = (est[k] - truth[m]) * (est[k] - truth[m]);
                    if (d < best_d)
                    {
                        best_d = d;
                        best = k;
                    }
                }
                out[m] = best;
            }
            return out;
        }
    }

    ForwardTrace forward(NetworkParameters &params, const RMatrix &inputs, Mode mode)
    {
        return run_forward(params, mode == Mode::train ? &params : nullptr, inputs, mode);
    }

    ForwardTrace infer(const NetworkParameters &params, const RMatrix &inputs)
    {
        return run_forward(params, nullptr, inputs, Mode::infer);
    }

    double chamfer_rmse(const std::vector<double> &true_angles, const std::vector<double> &estimates)
    {
        if (true_angles.empty() || estimates.empty())
            fail(ErrorKind::domain, "chamfer_rmse: both angle sets must be nonempty");
        const auto match = closest(estimates.data(), estimates.size(), true_angles.data(), true_angles.size());
        double s = 0.0;
        for (std::size_t m = 0; m < true_angles.size(); ++m)
        {
            const double d = estimates[match[m]] - true_angles[m];
            s += d * d;
        }
        return std::sqrt(s / static_cast<double>(true_angles.size()));
    }

    RVector softmax(const RVector &logits)
    {
        const double mx = logits.maxCoeff();
        RVector e = (logits.array() - mx).exp();
        return e / e.sum();
    }

    double normalize_angle(const NetworkSpec &spec, double theta_deg)
    {
        return (theta_deg - spec.angle_center_deg) / spec.angle_half_width_deg;
    }

    double denormalize_angle(const NetworkSpec &spec, double value)
    {
        return spec.angle_center_deg + value * spec.angle_half_width_deg;
    }

    LossBreakdown compute_loss(const ForwardTrace &trace, const std::vector<SourceScene> &scenes,
                               const NetworkSpec &spec, double weight, OutputGradients *grads)
    {
        const Eigen::Index B = trace.batch_size();
        if (static_cast<Eigen::Index>(scenes.size()) != B)
            fail(ErrorKind::structural, "compute_loss: scene count does not match the batch");
        if (grads)
        {
            grads->logits = RMatrix::Zero(trace.logits.rows(), B);
            grads->angles.clear();
            for (const auto &a : trace.angles)
                grads->angles.push_back(RMatrix::Zero(a.rows(), B));
        }

        LossBreakdown out;
        out.weight = weight;
        const double inv_b = 1.0 / static_cast<double>(B);
        for (Eigen::Index i = 0; i < B; ++i)
        {
            const auto &scene = scenes[static_cast<std::size_t>(i)];
            const int M = scene.count();
            if (M < 1 || M > 4)
                fail(ErrorKind::domain, "compute_loss: source count must be in 1..4");

            const RVector logits = trace.logits.col(i);
            const double mx = logits.maxCoeff();
            const double lse = mx + std::log((logits.array() - mx).exp().sum());
            out.cross_entropy += (lse - logits(M - 1)) * inv_b;

            std::vector<double> truth(static_cast<std::size_t>(M));
            for (int m = 0; m < M; ++m)
                truth[static_cast<std::size_t>(m)] = normalize_angle(spec, scene.angles_deg[static_cast<std::size_t>(m)]);
            const RMatrix &head = trace.angles[static_cast<std::size_t>(M - 1)];
            std::vector<double> est(static_cast<std::size_t>(M));
            for (int k = 0; k < M; ++k)
                est[static_cast<std::size_t>(k)] = head(k, i);
            const auto match = closest(est.data(), est.size(), truth.data(), truth.size());
            double mse = 0.0;
            for (int m = 0; m < M; ++m)
            {
                const double d = est[match[static_cast<std::size_t>(m)]] - truth[static_cast<std::size_t>(m)];
                mse += d * d;
            }
            mse /= M;
            const double rmse = std::sqrt(mse);
            out.angle_rmse += rmse * inv_b;

            if (grads)
            {
                const RVector p = (logits.array() - lse).exp();
                grads->logits.col(i) = p * inv_b;
                grads->logits(M - 1, i) -= inv_b;
                if (rmse > 0.0)
                {
                    // d sqrt(mse) / d est_k = (1 / (M rmse)) sum over matched m of (est_k - truth_m)
                    auto &g = grads->angles[static_cast<std::size_t>(M - 1)];
                    const double scale = weight * inv_b / (M * rmse);
                    for (int m = 0; m < M; ++m)
                    {
                        const auto k = match[static_cast<std::size_t>(m)];
                        g(static_cast<Eigen::Index>(k), i) += scale * (est[k] - truth[static_cast<std::size_t>(m)]);
                    }
                }
            }
        }
        out.total = out.cross_entropy + weight * out.angle_rmse;
        return out;
    }

    NetworkParameters backward(const NetworkParameters &params, const ForwardTrace &trace, const OutputGradients &upstream)
    {
        if (trace.mode != Mode::train)
            fail(ErrorKind::domain, "backward: requires a train-mode trace");
        const auto &spec = params.spec;
        NetworkParameters g = NetworkParameters::zeros(spec);
        const std::size_t depth = params.layers.size();
        const Eigen::Index B = trace.batch_size();

        // Gradient with respect to each hidden layer output.
        std::vector<RMatrix> d_out(depth);
        for (std::size_t l = 0; l < depth; ++l)
            d_out[l] = RMatrix::Zero(spec.hidden_widths[l], B);

        const RMatrix &h = trace.layers.back().output;
        g.classifier.weight = upstream.logits * h.transpose();
        g.classifier.bias = upstream.logits.rowwise().sum();
        d_out[depth - 1] += params.classifier.weight.transpose() * upstream.logits;
        for (std::size_t m = 0; m < params.regressors.size(); ++m)
        {
            const RMatrix &dy = upstream.angles[m];
            g.regressors[m].weight = dy * h.transpose();
            g.regressors[m].bias = dy.rowwise().sum();
            d_out[depth - 1] += params.regressors[m].weight.transpose() * dy;
        }

        const double inv_b = 1.0 / static_cast<double>(B);
        for (std::size_t li = depth; li-- > 0;)
        {
            const auto &L = params.layers[li];
            const auto &t = trace.layers[li];
            auto &G = g.layers[li];

            // ReLU
            const RMatrix d_bn = (t.output.array() > 0.0).select(d_out[li], 0.0);
            // y = gamma x_hat + beta
            G.beta = d_bn.rowwise().sum();
            G.gamma = (d_bn.array() * t.normalized.array()).rowwise().sum();
            const RMatrix d_xhat = d_bn.array().colwise() * L.gamma.array();
            // Batch-norm backward through the batch mean and variance.
            const RVector sum_dx = d_xhat.rowwise().sum();
            const RVector sum_dx_xhat = (d_xhat.array() * t.normalized.array()).rowwise().sum();
            RMatrix d_pre = (d_xhat.array() * static_cast<double>(B)).colwise() - sum_dx.array();
            d_pre.array() -= t.normalized.array().colwise() * sum_dx_xhat.array();
            d_pre = (d_pre.array().colwise() * (t.inv_std.array() * inv_b)).matrix();

            G.weight = d_pre * t.input.transpose();
            G.bias = d_pre.rowwise().sum();
            if (li == 0)
                continue;
            const RMatrix d_in = L.weight.transpose() * d_pre;
            if (!spec.dense_connectivity)
            {
                d_out[li - 1] += d_in;
                continue;
            }
            Eigen::Index r = spec.input_dim;
            for (std::size_t j = 0; j < li; ++j)
            {
                d_out[j] += d_in.middleRows(r, spec.hidden_widths[j]);
                r += spec.hidden_widths[j];
            }
        }
        return g;
    }

    void SgdMomentum::step(NetworkParameters &params, const NetworkParameters &grads, double lr, double momentum)
    {
        if (!(lr > 0.0))
            fail(ErrorKind::domain, "sgd: learning rate must be positive");
        if (!(momentum >= 0.0 && momentum < 1.0))
            fail(ErrorKind::domain, "sgd: momentum must lie in [0, 1)");
        if (params.spec != grads.spec || params.spec != velocity_.spec)
            fail(ErrorKind::mismatch, "sgd: parameter, gradient and velocity shapes differ");

        std::vector<const double *> g_ptrs;
        visit_tensors(grads, [&](const std::string &, const double *data, Eigen::Index, bool)
                      { g_ptrs.push_back(data); });
        std::vector<double *> v_ptrs;
        visit_tensors(velocity_, [&](const std::string &, double *data, Eigen::Index, bool)
                      { v_ptrs.push_back(data); });
        std::size_t idx = 0;
        visit_tensors(params, [&](const std::string &, double *data, Eigen::Index size, bool trainable)
                      {
            const std::size_t i = idx++;
            if (!trainable)
                return;
            Eigen::Map<RVector> p(data, size);
            Eigen::Map<RVector> v(v_ptrs[i], size);
            Eigen::Map<const RVector> gr(g_ptrs[i], size);
            v = momentum * v + gr;
            p -= lr * v; });
    }

    RMatrix snapshot_batch(const std::vector<const CVector *> &observations)
    {
        if (observations.empty())
            fail(ErrorKind::structural, "snapshot_batch: empty batch");
        const Eigen::Index N = observations.front()->size();
        RMatrix X(2 * N, static_cast<Eigen::Index>(observations.size()));
        for (std::size_t i = 0; i < observations.size(); ++i)
        {
            if (observations[i]->size() != N)
                fail(ErrorKind::structural, "snapshot_batch: inconsistent snapshot lengths");
            X.col(static_cast<Eigen::Index>(i)) = to_real_features(*observations[i]);
        }
        return X;
    }

    namespace
    {
        std::vector<double> head_angles(const NetworkSpec &spec, const ForwardTrace &trace, int M, Eigen::Index col)
        {
            const double lo = spec.angle_center_deg - spec.angle_half_width_deg;
            const double hi = spec.angle_center_deg + spec.angle_half_width_deg;
            std::vector<double> out(static_cast<std::size_t>(M));
            for (int k = 0; k < M; ++k)
                out[static_cast<std::size_t>(k)] =
                    std::clamp(denormalize_angle(spec, trace.angles[static_cast<std::size_t>(M - 1)](k, col)), lo, hi);
            std::sort(out.begin(), out.end());
            return out;
        }

        int decision(const ForwardTrace &trace, Eigen::Index col)
        {
            Eigen::Index arg = 0;
            trace.logits.col(col).maxCoeff(&arg);
            return static_cast<int>(arg) + 1;
        }
    }

    BatchPrediction predict_batch(const NetworkParameters &params, const std::vector<const CVector *> &observations)
    {
        const ForwardTrace trace = infer(params, snapshot_batch(observations));
        BatchPrediction out;
        for (Eigen::Index i = 0; i < trace.batch_size(); ++i)
        {
            out.order.push_back(decision(trace, i));
            std::vector<std::vector<double>> heads;
            for (int m = 1; m <= 4; ++m)
                heads.push_back(head_angles(params.spec, trace, m, i));
            out.angles.push_back(std::move(heads));
        }
        return out;
    }

    EstimateResult predict(const NetworkParameters &params, const CVector &y)
    {
        const auto start = std::chrono::steady_clock::now();
        const ForwardTrace trace = infer(params, snapshot_batch({&y}));
        EstimateResult r;
        r.method = "dnn";
        r.order = decision(trace, 0);
        r.angles_deg = head_angles(params.spec, trace, r.order, 0);
        r.objective = softmax(trace.logits.col(0))(r.order - 1);
        r.iterations = 1;
        r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }

    EstimateResult predict_known_order(const NetworkParameters &params, const CVector &y, int M)
    {
        if (M < 1 || M > 4)
            fail(ErrorKind::domain, "predict_known_order: source count must be in 1..4");
        const auto start = std::chrono::steady_clock::now();
        const ForwardTrace trace = infer(params, snapshot_batch({&y}));
        EstimateResult r;
        r.method = "dnn";
        r.order = M;
        r.angles_deg = head_angles(params.spec, trace, M, 0);
        r.objective = softmax(trace.logits.col(0))(M - 1);
        r.iterations = 1;
        r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }
}
