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

#ifndef AOA_NET_HPP
#define AOA_NET_HPP

#include "aoa/array_model.hpp"
#include "aoa/classical.hpp"

#include <string>
#include <vector>

namespace aoa
{
    // Fully connected network: hidden layers of Linear -> BatchNorm -> ReLU, then a
    // 4-way source-count classifier and one angle-regression head per count (1..4).
    struct NetworkSpec
    {
        int input_dim = 32;
        std::vector<int> hidden_widths{256, 512, 1024, 2048, 2048, 1024, 512, 256};
        bool dense_connectivity = false;
        int head_classes = 4;
        std::vector<int> head_regression_sizes{1, 2, 3, 4};
        // Angles are regressed as (theta - center) / half_width.
        double angle_center_deg = 0.0;
        double angle_half_width_deg = 25.0;

        int layer_input_dim(std::size_t layer) const;
        int head_input_dim() const { return hidden_widths.back(); }
        int total_outputs() const;

        void validate() const;

        bool operator==(const NetworkSpec &) const = default;
    };

    struct HiddenLayer
    {
        RMatrix weight; // out x in
        RVector bias;
        RVector gamma;
        RVector beta;
        RVector running_mean;
        RVector running_var;
    };

    struct AffineHead
    {
        RMatrix weight;
        RVector bias;
    };

    struct NetworkParameters
    {
        NetworkSpec spec;
        std::vector<HiddenLayer> layers;
        AffineHead classifier;
        std::vector<AffineHead> regressors; // regressors[m-1] outputs m angles

        std::size_t trainable_count() const;
        // Zero-valued parameters shaped like `spec` (used for gradients and velocities).
        static NetworkParameters zeros(const NetworkSpec &spec);
    };

    // Visits every tensor in a fixed order. fn(name, data, size, trainable).
    template <typename Params, typename Fn>
    void visit_tensors(Params &p, Fn &&fn)
    {
        for (std::size_t l = 0; l < p.layers.size(); ++l)
        {
            auto &L = p.layers[l];
            const std::string prefix = "hidden" + std::to_string(l) + ".";
            fn(prefix + "weight", L.weight.data(), L.weight.size(), true);
            fn(prefix + "bias", L.bias.data(), L.bias.size(), true);
            fn(prefix + "gamma", L.gamma.data(), L.gamma.size(), true);
            fn(prefix + "beta", L.beta.data(), L.beta.size(), true);
            fn(prefix + "running_mean", L.running_mean.data(), L.running_mean.size(), false);
            fn(prefix + "running_var", L.running_var.data(), L.running_var.size(), false);
        }
        fn(std::string("classifier.weight"), p.classifier.weight.data(), p.classifier.weight.size(), true);
        fn(std::string("classifier.bias"), p.classifier.bias.data(), p.classifier.bias.size(), true);
        for (std::size_t m = 0; m < p.regressors.size(); ++m)
        {
            const std::string prefix = "regressor" + std::to_string(m + 1) + ".";
            fn(prefix + "weight", p.regressors[m].weight.data(), p.regressors[m].weight.size(), true);
            fn(prefix + "bias", p.regressors[m].bias.data(), p.regressors[m].bias.size(), true);
        }
    }

    enum class Mode
    {
        train,
        infer
    };

    inline constexpr double batchnorm_epsilon = 1e-5;
    inline constexpr double batchnorm_decay = 0.99;

    struct LayerTrace
    {
        RMatrix input;      // fan_in x B
        RMatrix pre;        // W x + b
        RMatrix normalized; // x_hat
        RVector inv_std;
        RMatrix output;     // ReLU(gamma x_hat + beta)
    };

    // Activations for a batch; one column per example.
    struct ForwardTrace
    {
        Mode mode = Mode::infer;
        std::vector<LayerTrace> layers;
        RMatrix logits;              // 4 x B
        std::vector<RMatrix> angles; // angles[m-1]: m x B, normalized units

        Eigen::Index batch_size() const { return logits.cols(); }
    };

    NetworkParameters init_network(const NetworkSpec &spec, Rng &rng);

    // Train mode normalizes with batch statistics and updates the running
    // statistics in `params`; infer mode uses the running statistics.
    ForwardTrace forward(NetworkParameters &params, const RMatrix &inputs, Mode mode);
    ForwardTrace infer(const NetworkParameters &params, const RMatrix &inputs);

    struct LossBreakdown
    {
        double cross_entropy = 0.0;
        double angle_rmse = 0.0; // normalized units
        double total = 0.0;
        double weight = 1.0;
    };

    // Upstream gradients of the batch loss with respect to the network outputs.
    struct OutputGradients
    {
        RMatrix logits;
        std::vector<RMatrix> angles;
    };

    // Chamfer RMSE in the units of its arguments: for each true angle the squared
    // distance to its closest estimate, averaged over true angles, square-rooted.
    double chamfer_rmse(const std::vector<double> &true_angles, const std::vector<double> &estimates);

    RVector softmax(const RVector &logits);

    // Batch-averaged CE + weight * chamfer RMSE. Only the head matching each
    // example's true source count contributes. Fills `grads` when non-null.
    LossBreakdown compute_loss(const ForwardTrace &trace, const std::vector<SourceScene> &scenes,
                               const NetworkSpec &spec, double weight, OutputGradients *grads = nullptr);

    // Backpropagation through heads, ReLU, batch norm and linear layers.
    NetworkParameters backward(const NetworkParameters &params, const ForwardTrace &trace, const OutputGradients &upstream);

    class SgdMomentum
    {
    public:
        explicit SgdMomentum(const NetworkSpec &spec) : velocity_(NetworkParameters::zeros(spec)) {}
        explicit SgdMomentum(NetworkParameters velocity) : velocity_(std::move(velocity)) {}

        // v <- momentum v + g; p <- p - lr v (trainable tensors only).
        void step(NetworkParameters &params, const NetworkParameters &grads, double lr, double momentum);

        const NetworkParameters &velocity() const { return velocity_; }

    private:
        NetworkParameters velocity_;
    };

    double normalize_angle(const NetworkSpec &spec, double theta_deg);
    double denormalize_angle(const NetworkSpec &spec, double value);

    RMatrix snapshot_batch(const std::vector<const CVector *> &observations);

    // Decision = argmax class probability; angles from that head, in degrees, ascending.
    EstimateResult predict(const NetworkParameters &params, const CVector &y);

    // Uses the head for a known source count instead of the classifier decision.
    EstimateResult predict_known_order(const NetworkParameters &params, const CVector &y, int M);

    struct BatchPrediction
    {
        std::vector<int> order;                      // classifier decision per example
        std::vector<std::vector<std::vector<double>>> angles; // [example][head m-1] degrees, ascending
    };
    BatchPrediction predict_batch(const NetworkParameters &params, const std::vector<const CVector *> &observations);
}

#endif
