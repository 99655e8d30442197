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

#include "aoa/errors.hpp"
#include "aoa/net.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace aoa;

namespace
{
    NetworkSpec small_spec(bool dense = false)
    {
        NetworkSpec s;
        s.hidden_widths = {8, 8};
        s.dense_connectivity = dense;
        return s;
    }

    struct Batch
    {
        std::vector<Snapshot> snaps;
        std::vector<SourceScene> scenes;
        RMatrix X;
    };

    Batch make_batch(int B, std::uint64_t seed, int fixed_m = 0)
    {
        const auto g = ArrayGeometry::uniform_linear();
        SceneDistribution d;
        if (fixed_m)
            d.min_sources = d.max_sources = fixed_m;
        Batch b;
        std::vector<const CVector *> ys;
        for (int i = 0; i < B; ++i)
            b.snaps.push_back(draw_snapshot(g, d, derive_seed(seed, {static_cast<std::uint64_t>(i)})));
        for (const auto &s : b.snaps)
        {
            ys.push_back(&s.y);
            b.scenes.push_back(s.scene);
        }
        b.X = snapshot_batch(ys);
        return b;
    }

    double batch_loss(NetworkParameters p, const Batch &b, double w)
    {
        const auto tr = forward(p, b.X, Mode::train);
        return compute_loss(tr, b.scenes, p.spec, w).total;
    }

    // Flat views of every trainable scalar, in visit order.
    std::vector<double *> trainables(NetworkParameters &p)
    {
        std::vector<double *> out;
        visit_tensors(p, [&](const std::string &, double *data, Eigen::Index n, bool trainable)
                      {
            if (trainable)
                for (Eigen::Index i = 0; i < n; ++i)
                    out.push_back(data + i); });
        return out;
    }

    std::map<std::string, std::vector<double>> tensors_of(NetworkParameters &p)
    {
        std::map<std::string, std::vector<double>> m;
        visit_tensors(p, [&](const std::string &name, double *data, Eigen::Index n, bool)
                      { m[name] = std::vector<double>(data, data + n); });
        return m;
    }
}

TEST_CASE("spec: output structure and layer fan-in")
{
    NetworkSpec s;
    CHECK(s.total_outputs() == 14);
    CHECK(s.layer_input_dim(0) == 32);
    CHECK(s.layer_input_dim(3) == 1024);
    NetworkSpec d = small_spec(true);
    CHECK(d.layer_input_dim(0) == 32);
    CHECK(d.layer_input_dim(1) == 40);
    CHECK(d.head_input_dim() == 8);
    NetworkSpec bad;
    bad.hidden_widths.clear();
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("init: parameter count formula, determinism, He variance")
{
    NetworkSpec s;
    Rng r1(3), r2(3);
    NetworkParameters a = init_network(s, r1), b = init_network(s, r2);
    std::size_t expect = 0;
    int fan_in = 32;
    for (int w : s.hidden_widths)
    {
        expect += static_cast<std::size_t>(fan_in) * w + w + 2 * w; // weight, bias, gamma, beta
        fan_in = w;
    }
    expect += static_cast<std::size_t>(fan_in) * 14 + 14;
    CHECK(a.trainable_count() == expect);
    CHECK(tensors_of(a) == tensors_of(b));

    // the widest layer dominates: 2048 x 2048 multiplies
    CHECK(a.layers[4].weight.size() == 2048 * 2048);

    const RMatrix &W = a.layers[3].weight; // fan-in 1024
    const double var = W.squaredNorm() / static_cast<double>(W.size());
    CHECK(var == doctest::Approx(2.0 / 1024).epsilon(0.01));
    CHECK(a.layers[0].gamma.isOnes());
    CHECK(a.layers[0].beta.isZero());
    CHECK(a.layers[0].running_var.isOnes());
}

TEST_CASE("forward: symmetric zero heads give uniform softmax and CE log 4")
{
    Rng rng(1);
    NetworkParameters p = init_network(small_spec(), rng);
    p.classifier.weight.setZero();
    const RMatrix X = RMatrix::Zero(32, 3);
    const auto tr = infer(p, X);
    for (Eigen::Index i = 0; i < 3; ++i)
    {
        const RVector s = softmax(tr.logits.col(i));
        for (int k = 0; k < 4; ++k)
            CHECK(s(k) == doctest::Approx(0.25).epsilon(1e-15));
    }
    std::vector<SourceScene> scenes(3, SourceScene{{1.0, 2.0}, {1.0, 1.0}});
    NetworkParameters q = p;
    const auto tt = forward(q, RMatrix::Zero(32, 3), Mode::train);
    CHECK(compute_loss(tt, scenes, p.spec, 1.0).cross_entropy == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("forward: batch norm statistics, ReLU, determinism, running stats")
{
    Rng rng(2);
    NetworkParameters p = init_network(small_spec(), rng);
    const Batch b = make_batch(64, 9);
    const NetworkParameters before = p;
    const auto tr = forward(p, b.X, Mode::train);
    for (const auto &L : tr.layers)
    {
        const RVector mean = L.normalized.rowwise().mean();
        CHECK(mean.cwiseAbs().maxCoeff() <= 1e-6);
        for (Eigen::Index f = 0; f < L.normalized.rows(); ++f)
        {
            const double var = (L.normalized.row(f).array() - mean(f)).square().mean();
            const double s2 = (L.pre.row(f).array() - L.pre.row(f).mean()).square().mean();
            // biased batch variance with epsilon inside the root
            CHECK(var == doctest::Approx(s2 / (s2 + batchnorm_epsilon)).epsilon(1e-10));
            if (s2 >= 1.0)
                CHECK(std::abs(var - 1.0) <= 1e-5);
        }
        CHECK(L.output.minCoeff() >= 0.0);
    }
    // running mean moved by (1 - 0.99) of the batch mean
    const RVector batch_mean = tr.layers[0].pre.rowwise().mean();
    CHECK((p.layers[0].running_mean - 0.01 * batch_mean).norm() <= 1e-12);
    CHECK_FALSE(p.layers[0].running_var == before.layers[0].running_var);

    const auto i1 = infer(p, b.X), i2 = infer(p, b.X);
    CHECK(i1.logits == i2.logits);
    for (std::size_t m = 0; m < 4; ++m)
        CHECK(i1.angles[m] == i2.angles[m]);
    CHECK(i1.angles[3].rows() == 4);
}

TEST_CASE("forward: non-finite activations name the layer")
{
    Rng rng(3);
    NetworkParameters p = init_network(small_spec(), rng);
    const auto message_of = [&](const RMatrix &X)
    {
        try
        {
            infer(p, X);
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::numerical);
            return std::string(e.what());
        }
        FAIL("expected a numerical error");
        return std::string();
    };
    RMatrix X = RMatrix::Zero(32, 2);
    X(0, 0) = std::numeric_limits<double>::infinity();
    CHECK(message_of(X).find("the input") != std::string::npos);
    // finite input, corrupted parameter in the second hidden layer
    X.setZero();
    p.layers[1].beta(0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(message_of(X).find("hidden layer 1") != std::string::npos);
    CHECK_THROWS_AS(infer(p, RMatrix::Zero(30, 2)), Error);
}

TEST_CASE("chamfer rmse: worked examples and properties")
{
    CHECK(chamfer_rmse({10, 20}, {20, 10}) == 0.0);
    CHECK(chamfer_rmse({10, 20}, {10.5, 19}) == doctest::Approx(std::sqrt((0.25 + 1.0) / 2)).epsilon(1e-14));
    CHECK(chamfer_rmse({10, 20}, {10.5, 19}) == doctest::Approx(0.7906).epsilon(1e-4));
    CHECK(chamfer_rmse({0, 10}, {0, 0}) == doctest::Approx(7.0711).epsilon(1e-4));
    Rng rng(5);
    for (int t = 0; t < 50; ++t)
    {
        std::vector<double> a(4), b(3);
        for (auto &x : a)
            x = rng.uniform(-20, 20);
        for (auto &x : b)
            x = rng.uniform(-20, 20);
        const double v = chamfer_rmse(a, b);
        CHECK(v >= 0.0);
        CHECK(chamfer_rmse(a, a) == 0.0);
        std::vector<double> ra(a.rbegin(), a.rend()), rb(b.rbegin(), b.rend());
        CHECK(chamfer_rmse(ra, rb) == doctest::Approx(v).epsilon(1e-15));
    }
    CHECK_THROWS_AS(chamfer_rmse({}, {1.0}), Error);
}

TEST_CASE("softmax normalization")
{
    RVector l(4);
    l << 1000.0, -1000.0, 3.0, 0.0;
    const RVector s = softmax(l);
    CHECK(std::abs(s.sum() - 1.0) <= 1e-12);
    CHECK(s.minCoeff() >= 0.0);
    Rng rng(1);
    for (int t = 0; t < 20; ++t)
    {
        RVector r(4);
        for (int k = 0; k < 4; ++k)
            r(k) = rng.normal(0, 5);
        const RVector p = softmax(r);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
        CHECK(p.minCoeff() > 0.0);
    }
}

TEST_CASE("gradient check against central differences")
{
    for (bool dense : {false, true})
    {
        CAPTURE(dense);
        Rng rng(dense ? 21 : 20);
        NetworkParameters p = init_network(small_spec(dense), rng);
        // non-trivial batch-norm affine parameters
        for (auto &L : p.layers)
        {
            for (Eigen::Index i = 0; i < L.gamma.size(); ++i)
            {
                L.gamma(i) = rng.uniform(0.5, 1.5);
                L.beta(i) = rng.uniform(-0.3, 0.3);
            }
        }
        const Batch b = make_batch(3, dense ? 8 : 7);
        const double w = 0.7;

        NetworkParameters work = p;
        const auto tr = forward(work, b.X, Mode::train);
        OutputGradients up;
        compute_loss(tr, b.scenes, p.spec, w, &up);
        NetworkParameters g = backward(p, tr, up);

        // shapes follow the concatenated fan-in
        CHECK(g.layers[1].weight.cols() == p.spec.layer_input_dim(1));

        // distance to the nearest ReLU kink across the batch
        double kink = 1e300;
        for (const auto &L : tr.layers)
        {
            const auto &Lp = p.layers[&L - &tr.layers[0]];
            const RMatrix z = (L.normalized.array().colwise() * Lp.gamma.array()).colwise() + Lp.beta.array();
            kink = std::min(kink, z.cwiseAbs().minCoeff());
        }
        REQUIRE(kink > 1e-3);

        const auto ps = trainables(p);
        const auto gs = trainables(g);
        REQUIRE(ps.size() == gs.size());
        const double eps = 1e-5;
        double worst = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i)
        {
            const double orig = *ps[i];
            *ps[i] = orig + eps;
            const double fp = batch_loss(p, b, w);
            *ps[i] = orig - eps;
            const double fm = batch_loss(p, b, w);
            *ps[i] = orig;
            const double fd = (fp - fm) / (2 * eps);
            const double rel = std::abs(fd - *gs[i]) / std::max({std::abs(fd), std::abs(*gs[i]), 1e-6});
            worst = std::max(worst, rel);
        }
        MESSAGE("worst relative gradient error (dense=" << dense << "): " << worst);
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("loss masking: heads of other source counts receive exactly zero gradient")
{
    Rng rng(30);
    NetworkParameters p = init_network(small_spec(), rng);
    const Batch b = make_batch(16, 3);
    NetworkParameters work = p;
    const auto tr = forward(work, b.X, Mode::train);
    OutputGradients up;
    compute_loss(tr, b.scenes, p.spec, 1.0, &up);
    for (std::size_t i = 0; i < b.scenes.size(); ++i)
        for (int m = 1; m <= 4; ++m)
            if (m != b.scenes[i].count())
                CHECK(up.angles[static_cast<std::size_t>(m - 1)].col(static_cast<Eigen::Index>(i)).isZero(0.0));

    const Batch two = make_batch(8, 4, 2);
    NetworkParameters w2 = p;
    const auto t2 = forward(w2, two.X, Mode::train);
    compute_loss(t2, two.scenes, p.spec, 1.0, &up);
    const NetworkParameters g = backward(p, t2, up);
    for (int m : {0, 2, 3})
    {
        CHECK(g.regressors[static_cast<std::size_t>(m)].weight.isZero(0.0));
        CHECK(g.regressors[static_cast<std::size_t>(m)].bias.isZero(0.0));
    }
    CHECK_FALSE(g.regressors[1].weight.isZero(0.0));
}

TEST_CASE("zero-loss configuration has zero gradients")
{
    Rng rng(40);
    NetworkParameters p = init_network(small_spec(), rng);
    const Batch b = make_batch(4, 5, 1);
    std::vector<SourceScene> scenes(4, SourceScene{{5.0}, {1.0}});
    p.classifier.weight.setZero();
    p.classifier.bias << 1000.0, 0.0, 0.0, 0.0;
    p.regressors[0].weight.setZero();
    p.regressors[0].bias(0) = normalize_angle(p.spec, 5.0);
    NetworkParameters work = p;
    const auto tr = forward(work, b.X, Mode::train);
    OutputGradients up;
    const auto loss = compute_loss(tr, scenes, p.spec, 1.0, &up);
    CHECK(loss.total <= 1e-12);
    CHECK(loss.total == doctest::Approx(loss.cross_entropy + loss.weight * loss.angle_rmse));
    NetworkParameters g = backward(p, tr, up);
    for (double *x : trainables(g))
        CHECK(std::abs(*x) <= 1e-9);
}

TEST_CASE("sgd with momentum")
{
    NetworkSpec s = small_spec();
    Rng rng(50);
    const NetworkParameters p0 = init_network(s, rng);
    NetworkParameters g = init_network(s, rng);

    NetworkParameters p = p0;
    SgdMomentum plain(s);
    plain.step(p, g, 0.1, 0.0);
    CHECK((p.layers[0].weight - (p0.layers[0].weight - 0.1 * g.layers[0].weight)).norm() == 0.0);
    // running statistics are not touched by the optimizer
    CHECK(p.layers[0].running_var == p0.layers[0].running_var);

    NetworkParameters q = p0;
    SgdMomentum mom(s);
    mom.step(q, g, 0.1, 0.9);
    mom.step(q, g, 0.1, 0.9);
    const RMatrix disp = q.classifier.weight - p0.classifier.weight;
    CHECK((disp + 0.1 * g.classifier.weight * 2.9).norm() <= 1e-12 * g.classifier.weight.norm());

    // quadratic bowl 0.5 |p|^2: gradient equals the parameters
    NetworkParameters x = p0;
    SgdMomentum opt(s);
    int steps = 0;
    auto maxabs = [](NetworkParameters &n)
    {
        double m = 0.0;
        for (double *v : trainables(n))
            m = std::max(m, std::abs(*v));
        return m;
    };
    while (maxabs(x) > 1e-6 && steps < 500)
    {
        NetworkParameters grad = x;
        opt.step(x, grad, 0.1, 0.9);
        ++steps;
    }
    MESSAGE("quadratic converged in " << steps << " steps");
    CHECK(maxabs(x) <= 1e-6);

    CHECK_THROWS_AS(opt.step(x, g, 0.0, 0.9), Error);
    CHECK_THROWS_AS(opt.step(x, g, 0.1, 1.0), Error);
}

TEST_CASE("prediction decisions and denormalization")
{
    Rng rng(60);
    NetworkParameters p = init_network(small_spec(), rng);
    p.classifier.weight.setZero();
    p.classifier.bias << 5.0, 0.0, 0.0, 0.0;
    for (auto &h : p.regressors)
    {
        h.weight.setZero();
        h.bias.setZero();
    }
    const CVector y = CVector::Ones(16);
    const auto r = predict(p, y);
    CHECK(r.order == 1);
    REQUIRE(r.angles_deg.size() == 1);
    CHECK(r.angles_deg[0] == 0.0);

    p.regressors[2].bias << 0.8, -0.2, 3.0; // last value clamps to the FOV edge
    const auto k = predict_known_order(p, y, 3);
    CHECK(k.angles_deg == std::vector<double>{-5.0, 20.0, 25.0});

    NetworkSpec off = p.spec;
    off.angle_center_deg = 10.0;
    off.angle_half_width_deg = 5.0;
    CHECK(normalize_angle(off, 12.5) == 0.5);
    CHECK(denormalize_angle(off, -1.0) == 5.0);

    const auto batch = predict_batch(p, {&y, &y});
    CHECK(batch.order == std::vector<int>{1, 1});
    CHECK(batch.angles[1][2] == k.angles_deg);
}
